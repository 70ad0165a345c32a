import hashlib
import json
import logging
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from Utils.csv_io import save_curve_csv, save_profile_csv, save_surface_csv, save_table_csv
from Utils.errors import CmcError, InvalidArgumentError, ParseError
from .crossmap import convergence_curve
from .embedding import EmbeddingConfig
from .prominence import CausalStrengthProfile, strength_profile
from .shift_scan import (CcmCurve, CmcSurface, ShiftRange, average_curves, average_surfaces,
                         normalize_per_band, scan_shifts)
from .spectral import SpectralConfig
from .timeseries import TimeSeries


ARTIFACT_VERSION = "1.0.0"


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything one bidirectional analysis needs

    Serialised to and from JSON with the same field names the CLI flags use.
    """
    embedding: EmbeddingConfig = EmbeddingConfig()
    spectral: SpectralConfig = SpectralConfig()
    shift_range: ShiftRange = ShiftRange()
    library_lengths: Tuple[int, ...] = ()
    normalization: bool = False
    realizations: int = 1
    seed: int = 0
    neighbors: Optional[int] = None
    exclusion_radius: int = 0
    max_delay: Optional[int] = None
    coordinate: int = 0

    def __post_init__(self):
        if self.realizations < 1:
            raise InvalidArgumentError(f"realizations must be positive, got {self.realizations}")
        if not 0 <= self.coordinate < self.embedding.dimension:
            raise InvalidArgumentError(
                f"coordinate {self.coordinate} outside [0, {self.embedding.dimension})")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["library_lengths"] = list(self.library_lengths)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AnalysisConfig":
        try:
            embedding = data.get("embedding", {})
            spectral = data.get("spectral", {})
            shifts = data.get("shift_range", {})
            return cls(
                embedding=EmbeddingConfig(int(embedding.get("dimension", 2)), int(embedding.get("delay", 1))),
                spectral=SpectralConfig(
                    segment_length=spectral.get("segment_length"),
                    overlap_fraction=float(spectral.get("overlap_fraction", 0.5)),
                    window=spectral.get("window", "hann"),
                    detrend_per_segment=bool(spectral.get("detrend_per_segment", True)),
                ),
                shift_range=ShiftRange(int(shifts.get("min_shift", -20)), int(shifts.get("max_shift", 20)),
                                       int(shifts.get("step", 1))),
                library_lengths=tuple(int(v) for v in data.get("library_lengths", ())),
                normalization=bool(data.get("normalization", False)),
                realizations=int(data.get("realizations", 1)),
                seed=int(data.get("seed", 0)),
                neighbors=data.get("neighbors"),
                exclusion_radius=int(data.get("exclusion_radius", 0)),
                max_delay=data.get("max_delay"),
                coordinate=int(data.get("coordinate", 0)),
            )
        except (TypeError, AttributeError) as e:
            raise ParseError(f"Malformed analysis config: {e}") from e

    @classmethod
    def load(cls, path: Path) -> "AnalysisConfig":
        try:
            with open(path, 'r') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, line=e.lineno, path=str(path)) from e
        except FileNotFoundError as e:
            raise ParseError("Config file not found", path=str(path)) from e
        return cls.from_dict(data)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def provenance(self) -> Dict[str, str]:
        return {"config_hash": self.config_hash(), "seed": str(self.seed), "version": ARTIFACT_VERSION}


@dataclass(frozen=True, eq=False)
class DirectionResult:
    """Everything computed for one tested direction"""
    label: str
    ccm: CcmCurve
    cmc: CmcSurface
    cmc_normalized: CmcSurface
    profile: CausalStrengthProfile
    profile_normalized: CausalStrengthProfile
    convergence: Tuple[Tuple[int, float], ...] = ()


@dataclass(frozen=True, eq=False)
class ResultBundle:
    forward: DirectionResult
    backward: DirectionResult
    provenance: Dict[str, str] = field(default_factory=dict)
    normalization: bool = False

    def directions(self) -> Tuple[DirectionResult, DirectionResult]:
        return self.forward, self.backward

    def strength(self, direction: DirectionResult) -> CausalStrengthProfile:
        """Profile the analysis config asked for (normalized or raw)"""
        return direction.profile_normalized if self.normalization else direction.profile

    def summary(self) -> Dict[str, float]:
        return {d.label: self.strength(d).mean_strength() for d in self.directions()}


@contextmanager
def _stage(name: str):
    """Prefix component errors with the pipeline stage they came from"""
    try:
        yield
    except CmcError as e:
        # same object, so subclass fields such as line, path and step survive
        if e.args:
            e.args = (f"[{name}] {e.args[0]}",) + e.args[1:]
        raise


def _name_pair(x: TimeSeries, y: TimeSeries) -> Tuple[TimeSeries, TimeSeries]:
    if x.name and y.name and x.name != y.name:
        return x, y
    return x.renamed("x"), y.renamed("y")


def _scan(cause: TimeSeries, effect: TimeSeries, cfg: AnalysisConfig,
          workers: Optional[int]) -> Tuple[CcmCurve, CmcSurface]:
    with _stage(f"{cause.name}→{effect.name} scan"):
        scan = scan_shifts(effect, cause, cfg.embedding, cfg.shift_range, cfg.spectral,
                           k=cfg.neighbors, exclusion_radius=cfg.exclusion_radius,
                           coordinate=cfg.coordinate, workers=workers)
    return scan.ccm, scan.cmc


def _convergence(cause: TimeSeries, effect: TimeSeries, cfg: AnalysisConfig) -> Tuple[Tuple[int, float], ...]:
    if not cfg.library_lengths:
        return ()
    with _stage(f"{cause.name}→{effect.name} convergence"):
        return tuple(convergence_curve(effect, cause, cfg.embedding, cfg.library_lengths,
                                       cfg.neighbors, cfg.exclusion_radius))


def _direction_result(ccm: CcmCurve, cmc: CmcSurface, normalized: CmcSurface, cfg: AnalysisConfig,
                      convergence: Tuple[Tuple[int, float], ...] = ()) -> DirectionResult:
    E = cfg.embedding.dimension
    with _stage(f"{cmc.direction_label} prominence"):
        return DirectionResult(
            label=cmc.direction_label,
            ccm=ccm,
            cmc=cmc,
            cmc_normalized=normalized,
            profile=strength_profile(cmc, E, cfg.max_delay),
            profile_normalized=strength_profile(normalized, E, cfg.max_delay),
            convergence=convergence,
        )


def run_pipeline(cfg: AnalysisConfig, x: TimeSeries, y: TimeSeries,
                 workers: Optional[int] = None) -> ResultBundle:
    """Bidirectional CCM/CMC analysis of one pair

    forward tests x->y (embed y, predict x); backward tests y->x.
    """
    if len(x) != len(y):
        raise InvalidArgumentError(f"Series lengths differ: {len(x)} vs {len(y)}")
    x, y = _name_pair(x, y)
    logging.info(f"Analyzing {x.name}/{y.name}: {len(x)} samples at {x.sample_rate:g} Hz, "
                 f"E={cfg.embedding.dimension}, tau={cfg.embedding.delay}")

    results = []
    for cause, effect in ((x, y), (y, x)):
        ccm, cmc = _scan(cause, effect, cfg, workers)
        results.append(_direction_result(ccm, cmc, normalize_per_band(cmc), cfg,
                                         _convergence(cause, effect, cfg)))
    return ResultBundle(results[0], results[1], cfg.provenance(), cfg.normalization)


def run_realizations(cfg: AnalysisConfig, pairs: Sequence[Tuple[TimeSeries, TimeSeries]],
                     workers: Optional[int] = None) -> ResultBundle:
    """Average CCM curves and CMC surfaces over independent realizations

    Normalized surfaces are normalized per realization and then averaged.
    """
    if not pairs:
        raise InvalidArgumentError("No realizations to analyze")
    scans: Dict[str, List[Tuple[CcmCurve, CmcSurface]]] = {"forward": [], "backward": []}
    for i, (x, y) in enumerate(tqdm(pairs, desc="realizations", leave=False)):
        logging.info(f"Realization {i + 1}/{len(pairs)}")
        x, y = _name_pair(x, y)
        scans["forward"].append(_scan(x, y, cfg, workers))
        scans["backward"].append(_scan(y, x, cfg, workers))

    results = []
    for key in ("forward", "backward"):
        ccm = average_curves([c for c, _ in scans[key]])
        cmc = average_surfaces([s for _, s in scans[key]])
        normalized = average_surfaces([normalize_per_band(s) for _, s in scans[key]])
        results.append(_direction_result(ccm, cmc, normalized, cfg))
    return ResultBundle(results[0], results[1], cfg.provenance(), cfg.normalization)


def label_stem(label: str) -> str:
    return label.replace("→", "_to_").replace(" ", "_")


def save_bundle(bundle: ResultBundle, output_dir: Path, prefix: str = "") -> List[Path]:
    """Write every curve, surface and profile of a bundle as CSV"""
    output_dir = Path(output_dir)
    written = []
    for direction in bundle.directions():
        stem = f"{prefix}{label_stem(direction.label)}"
        written.append(save_curve_csv(output_dir / f"{stem}_ccm.csv", direction.ccm, bundle.provenance))
        written.append(save_surface_csv(output_dir / f"{stem}_cmc.csv", direction.cmc, bundle.provenance))
        written.append(save_surface_csv(output_dir / f"{stem}_cmc_normalized.csv",
                                        direction.cmc_normalized, bundle.provenance))
        written.append(save_profile_csv(output_dir / f"{stem}_strength.csv", direction.profile, bundle.provenance))
        written.append(save_profile_csv(output_dir / f"{stem}_strength_normalized.csv",
                                        direction.profile_normalized, bundle.provenance))
        if direction.convergence:
            written.append(save_table_csv(output_dir / f"{stem}_convergence.csv",
                                          ["library_length", "ccm_r2"],
                                          [(int(n), float(s)) for n, s in direction.convergence],
                                          bundle.provenance))
    logging.info(f"Wrote {len(written)} result files to {output_dir}")
    return written
