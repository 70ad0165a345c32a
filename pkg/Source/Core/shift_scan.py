"""Time-shifted cross-mapping: the CCM function and the shift x frequency CMC surface.

Direction naming: "A->B" is tested by embedding B (candidate effect) and
predicting A (candidate cause). Negative shifts are the causal side, where
the candidate cause is displaced earlier than the effect.
"""

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from Utils.errors import InvalidArgumentError
from Utils.workers import parallel_map
from .crossmap import Prediction, cross_map, find_neighbors
from .embedding import EmbeddingConfig, embed
from .spectral import SpectralConfig, coherence_arrays
from .timeseries import TimeSeries, pearson_r2

MIN_OVERLAP = 3


@dataclass(frozen=True)
class ShiftRange:
    min_shift: int = -20
    max_shift: int = 20
    step: int = 1

    def __post_init__(self):
        if self.step < 1:
            raise InvalidArgumentError(f"Shift step must be positive, got {self.step}")
        if not self.min_shift <= 0 <= self.max_shift:
            raise InvalidArgumentError(
                f"Shift range [{self.min_shift}, {self.max_shift}] must contain 0")

    @classmethod
    def from_seconds(cls, min_seconds: float, max_seconds: float, sample_rate: float,
                     step: int = 1) -> "ShiftRange":
        return cls(int(np.ceil(min_seconds * sample_rate - 1e-9)),
                   int(np.floor(max_seconds * sample_rate + 1e-9)), step)

    def shifts(self) -> np.ndarray:
        """Multiples of step inside [min_shift, max_shift]; always includes 0"""
        lo = -((-self.min_shift) // self.step)
        hi = self.max_shift // self.step
        return np.arange(lo, hi + 1) * self.step

    @property
    def max_abs(self) -> int:
        s = self.shifts()
        return int(np.abs(s).max())


@dataclass(frozen=True, eq=False)
class CcmCurve:
    shifts: np.ndarray
    scores: np.ndarray
    direction_label: str

    def __post_init__(self):
        if len(self.shifts) != len(self.scores):
            raise InvalidArgumentError("CcmCurve shifts and scores differ in length")


@dataclass(frozen=True, eq=False)
class CmcSurface:
    """Coherence between prediction and truth, rows = shifts, columns = frequencies"""
    shifts: np.ndarray
    frequencies: np.ndarray
    values: np.ndarray
    direction_label: str
    normalized: bool = False
    degenerate: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.values.shape != (len(self.shifts), len(self.frequencies)):
            raise InvalidArgumentError(
                f"Surface shape {self.values.shape} does not match axes "
                f"({len(self.shifts)}, {len(self.frequencies)})")


@dataclass(frozen=True, eq=False)
class ShiftScan:
    ccm: CcmCurve
    cmc: Optional[CmcSurface]


def direction_label(cause: TimeSeries, effect: TimeSeries) -> str:
    return f"{cause.name or 'y'}→{effect.name or 'x'}"


def shift_pair(x: TimeSeries, y: TimeSeries, shift: int,
               min_overlap: int = MIN_OVERLAP) -> Tuple[TimeSeries, TimeSeries]:
    """Overlapping segments with y displaced by shift samples relative to x

    A negative shift pairs earlier y samples with later x samples.
    """
    n = min(len(x), len(y))
    if abs(shift) > n - min_overlap:
        raise InvalidArgumentError(
            f"Shift {shift} leaves fewer than {min_overlap} overlapping samples (length {n})")
    if shift < 0:
        return x.segment(-shift, n), y.segment(0, n + shift)
    if shift > 0:
        return x.segment(0, n - shift), y.segment(shift, n)
    return x.segment(0, n), y.segment(0, n)


def _aligned(x: TimeSeries, y: TimeSeries, shift: int, length: int) -> Tuple[TimeSeries, TimeSeries]:
    xs, ys = shift_pair(x, y, shift)
    return xs.segment(0, length), ys.segment(0, length)


def _common_length(x: TimeSeries, y: TimeSeries, shift_range: ShiftRange, cfg: EmbeddingConfig) -> int:
    length = min(len(x), len(y)) - shift_range.max_abs
    if length <= cfg.window + cfg.default_neighbors:
        raise InvalidArgumentError(
            f"Shift range ±{shift_range.max_abs} leaves {length} samples, too few for "
            f"embedding window {cfg.window}")
    return length


def _predict_at_shift(x: TimeSeries, y: TimeSeries, shift: int, length: int, cfg: EmbeddingConfig,
                      library_length: Optional[int], k: Optional[int], exclusion_radius: int,
                      coordinate: int) -> Prediction:
    xs, ys = _aligned(x, y, shift, length)
    manifold = embed(xs, cfg)
    library = manifold if library_length is None else manifold.prefix(library_length)
    model = find_neighbors(library, manifold, k, exclusion_radius)
    logging.debug(f"Shift {shift}: {len(manifold)} manifold rows, library {len(library)}")
    return cross_map(model, ys, cfg, coordinate)


def scan_shifts(x: TimeSeries, y: TimeSeries, cfg: EmbeddingConfig, shift_range: ShiftRange,
                scfg: Optional[SpectralConfig] = SpectralConfig(), library_length: Optional[int] = None,
                k: Optional[int] = None, exclusion_radius: int = 0, coordinate: int = 0,
                workers: Optional[int] = None) -> ShiftScan:
    """CCM curve and CMC surface from one prediction per shift

    x is embedded (candidate effect) and y is predicted (candidate cause).
    Every shift uses the same overlap length so manifolds are comparable
    across the shift axis. Pass scfg=None to skip the spectral part.
    """
    if x.sample_rate != y.sample_rate:
        raise InvalidArgumentError(f"Sample rate mismatch: {x.sample_rate} vs {y.sample_rate}")
    shifts = shift_range.shifts()
    length = _common_length(x, y, shift_range, cfg)
    label = direction_label(y, x)
    logging.info(f"Scanning {len(shifts)} shifts for {label} (overlap {length} samples, E={cfg.dimension})")

    def work(shift: int):
        prediction = _predict_at_shift(x, y, int(shift), length, cfg, library_length, k,
                                       exclusion_radius, coordinate)
        score = pearson_r2(prediction.values, prediction.observed)
        curve = None
        if scfg is not None:
            curve = coherence_arrays(prediction.observed, prediction.values, x.sample_rate, scfg)
        return score, curve

    results = parallel_map(work, shifts, workers=workers, desc=f"shifts {label}")

    ccm = CcmCurve(shifts.copy(), np.array([score for score, _ in results]), label)
    if scfg is None:
        return ShiftScan(ccm, None)
    frequencies = results[0][1].frequencies
    values = np.vstack([curve.coherence for _, curve in results])
    degenerate = np.vstack([curve.degenerate for _, curve in results])
    if degenerate.any():
        logging.warning(f"{label}: {int(degenerate.sum())} degenerate coherence bins reported as 0")
    return ShiftScan(ccm, CmcSurface(shifts.copy(), frequencies, values, label, False, degenerate))


def ccm_function(x: TimeSeries, y: TimeSeries, cfg: EmbeddingConfig, shift_range: ShiftRange,
                 library_length: Optional[int] = None, k: Optional[int] = None,
                 exclusion_radius: int = 0, coordinate: int = 0,
                 workers: Optional[int] = None) -> CcmCurve:
    return scan_shifts(x, y, cfg, shift_range, None, library_length, k, exclusion_radius,
                       coordinate, workers).ccm


def cmc_surface(x: TimeSeries, y: TimeSeries, cfg: EmbeddingConfig, shift_range: ShiftRange,
                scfg: SpectralConfig = SpectralConfig(), k: Optional[int] = None,
                exclusion_radius: int = 0, coordinate: int = 0,
                workers: Optional[int] = None) -> CmcSurface:
    return scan_shifts(x, y, cfg, shift_range, scfg, None, k, exclusion_radius,
                       coordinate, workers).cmc


def coordinate_average(x: TimeSeries, y: TimeSeries, cfg: EmbeddingConfig, shift_range: ShiftRange,
                       scfg: Optional[SpectralConfig] = SpectralConfig(), k: Optional[int] = None,
                       exclusion_radius: int = 0, workers: Optional[int] = None) -> List[ShiftScan]:
    """Scans for every target coordinate 0..E-1, newest first"""
    return [scan_shifts(x, y, cfg, shift_range, scfg, None, k, exclusion_radius, j, workers)
            for j in range(cfg.dimension)]


def normalize_per_band(surface: CmcSurface) -> CmcSurface:
    """Min-max rescale every frequency column to [0, 1]; constant columns become 0"""
    values = surface.values
    lo = values.min(axis=0, keepdims=True)
    span = values.max(axis=0, keepdims=True) - lo
    flat = span[0] == 0.0
    safe = np.where(span == 0.0, 1.0, span)
    scaled = (values - lo) / safe
    scaled[:, flat] = 0.0
    return replace(surface, values=scaled, normalized=True)


def _same_axes(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and np.array_equal(a, b)


def average_surfaces(surfaces: Sequence[CmcSurface]) -> CmcSurface:
    """Elementwise mean of surfaces sharing shift and frequency axes"""
    if not surfaces:
        raise InvalidArgumentError("No surfaces to average")
    first = surfaces[0]
    for other in surfaces[1:]:
        if not (_same_axes(first.shifts, other.shifts) and _same_axes(first.frequencies, other.frequencies)):
            raise InvalidArgumentError("Cannot average surfaces with different shift/frequency axes")
        if other.normalized != first.normalized:
            raise InvalidArgumentError("Cannot average normalized with raw surfaces")
        if other.direction_label != first.direction_label:
            logging.warning(f"Averaging surfaces labelled {first.direction_label} and {other.direction_label}")

    values = np.mean(np.stack([s.values for s in surfaces]), axis=0)
    degenerate = None
    if all(s.degenerate is not None for s in surfaces):
        degenerate = np.any(np.stack([s.degenerate for s in surfaces]), axis=0)
    return replace(first, values=values, degenerate=degenerate)


def average_curves(curves: Sequence[CcmCurve]) -> CcmCurve:
    if not curves:
        raise InvalidArgumentError("No curves to average")
    first = curves[0]
    if any(not _same_axes(first.shifts, c.shifts) for c in curves[1:]):
        raise InvalidArgumentError("Cannot average CCM curves with different shift axes")
    return replace(first, scores=np.mean(np.stack([c.scores for c in curves]), axis=0))
