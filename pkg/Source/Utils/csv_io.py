"""CSV files with '#'-prefixed key=value header lines.

Series files hold one column per series in time order. Result files (curves,
surfaces, profiles) are long-form tables with a column-name row. Every file
written here embeds the provenance block as header lines.
"""

import csv
import io
import logging
import os
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from Core.timeseries import TimeSeries
from .errors import InvalidArgumentError, ParseError

FLOAT_FORMAT = "{:.17g}"


def format_float(value: float) -> str:
    return FLOAT_FORMAT.format(float(value))


def atomic_write(path: Path, text: str) -> Path:
    """Write through a temp file in the target directory, then rename over path"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp, path)
    except Exception:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _header(meta: Dict[str, object]) -> str:
    return "".join(f"# {key}={value}\n" for key, value in meta.items())


def _table(columns: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if columns:
        writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def save_csv(path: Path, series: Sequence[TimeSeries], provenance: Optional[Dict[str, object]] = None) -> Path:
    """Write equal-length, equal-rate series as columns"""
    if not series:
        raise InvalidArgumentError("Nothing to write")
    n = len(series[0])
    rate = series[0].sample_rate
    if any(len(s) != n or s.sample_rate != rate for s in series):
        raise InvalidArgumentError("All series in one CSV must share length and sample rate")

    names = [s.name or f"series{i + 1}" for i, s in enumerate(series)]
    meta = {"sample_rate": format_float(rate), "t0": format_float(series[0].t0),
            "columns": ",".join(names)}
    meta.update(provenance or {})
    data = np.column_stack([s.samples for s in series])
    rows = ([format_float(v) for v in row] for row in data)
    return atomic_write(path, _header(meta) + _table([], rows))


def load_csv(path: Path) -> List[TimeSeries]:
    """Read one TimeSeries per column

    Raises:
        ParseError: For ragged rows, non-numeric cells or an empty file,
            with the offending line number
    """
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            lines = f.read().splitlines()
    except FileNotFoundError as e:
        raise ParseError("File not found", path=str(path)) from e
    except UnicodeDecodeError as e:
        raise ParseError(f"Not UTF-8 text: {e}", path=str(path)) from e

    meta: Dict[str, str] = {}
    rows: List[List[float]] = []
    width = None
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, sep, value = stripped.lstrip("#").strip().partition("=")
            if sep:
                meta[key.strip()] = value.strip()
            continue

        cells = next(csv.reader([line]))
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(f"Expected {width} columns, found {len(cells)}", line=number, path=str(path))
        try:
            values = [float(cell) for cell in cells]
        except ValueError:
            raise ParseError(f"Non-numeric cell in row: {line!r}", line=number, path=str(path))
        if not all(np.isfinite(values)):
            raise ParseError("Non-finite value", line=number, path=str(path))
        rows.append(values)

    if not rows:
        raise ParseError("No data rows", path=str(path))

    if "sample_rate" in meta:
        try:
            sample_rate = float(meta["sample_rate"])
        except ValueError:
            raise ParseError(f"Invalid sample_rate header {meta['sample_rate']!r}", path=str(path))
    else:
        logging.warning(f"{path}: no sample_rate header, assuming 1.0 Hz")
        sample_rate = 1.0
    t0 = float(meta.get("t0", 0.0))

    names = meta["columns"].split(",") if "columns" in meta else []
    if len(names) != width:
        names = [f"series{i + 1}" for i in range(width)]

    data = np.asarray(rows, dtype=float)
    return [TimeSeries(data[:, i], sample_rate, t0, names[i].strip()) for i in range(width)]


def save_curve_csv(path: Path, curve, provenance: Optional[Dict[str, object]] = None) -> Path:
    meta = {"direction": curve.direction_label}
    meta.update(provenance or {})
    rows = ([str(int(s)), format_float(v)] for s, v in zip(curve.shifts, curve.scores))
    return atomic_write(path, _header(meta) + _table(["shift_samples", "ccm_r2"], rows))


def save_surface_csv(path: Path, surface, provenance: Optional[Dict[str, object]] = None) -> Path:
    """Long-form shift_samples, frequency_hz, coherence table"""
    meta = {"direction": surface.direction_label, "normalized": str(surface.normalized).lower()}
    meta.update(provenance or {})
    rows = ([str(int(s)), format_float(f), format_float(surface.values[i, j])]
            for i, s in enumerate(surface.shifts)
            for j, f in enumerate(surface.frequencies))
    return atomic_write(path, _header(meta) + _table(["shift_samples", "frequency_hz", "coherence"], rows))


def save_profile_csv(path: Path, profile, provenance: Optional[Dict[str, object]] = None) -> Path:
    meta = {"direction": profile.direction_label}
    meta.update(provenance or {})
    granger = profile.granger_delay or (None,) * len(profile.delay)
    rows = ([format_float(f), format_float(s), "" if d is None else str(d), "" if g is None else str(g)]
            for f, s, d, g in zip(profile.frequencies, profile.strength, profile.delay, granger))
    return atomic_write(path, _header(meta) + _table(
        ["frequency_hz", "strength", "delay_samples", "granger_delay_samples"], rows))


def save_table_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[object]],
                   provenance: Optional[Dict[str, object]] = None) -> Path:
    formatted = ([format_float(v) if isinstance(v, (float, np.floating)) else str(v) for v in row]
                 for row in rows)
    return atomic_write(path, _header(provenance or {}) + _table(columns, formatted))
