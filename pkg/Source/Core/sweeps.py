"""Robustness sweeps over data length, coupling strength, observation noise and embedding dimension."""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from Utils.errors import UsageError
from .embedding import EmbeddingConfig
from .pipeline import AnalysisConfig, ResultBundle, run_pipeline
from .simulators import PRESETS, LogisticMapConfig, create_simulator_from_config
from .timeseries import NoiseConfig, TimeSeries, add_observational_noise

LENGTHS = (400, 700, 1000, 2000, 5000)
COUPLINGS = (0.0, 0.05, 0.1, 0.15, 0.2)
SNRS = (1000.0, 100.0, 10.0, 5.0, 2.0)
DIMENSIONS = (2, 4, 6, 8, 10)
EMBEDDING_SWEEP_LENGTH = 20000


@dataclass(frozen=True, eq=False)
class SweepPoint:
    parameter: str
    value: float
    bundle: ResultBundle


def _simulate_pair(config: LogisticMapConfig) -> Tuple[TimeSeries, TimeSeries]:
    x, y = create_simulator_from_config(config).simulate()[:2]
    return x, y


def length_sweep(cfg: AnalysisConfig, lengths: Sequence[int] = LENGTHS,
                 workers: Optional[int] = None) -> List[SweepPoint]:
    """Analyze the first L samples of one unidirectional run for each L"""
    base = PRESETS["logistic-length"]
    x, y = _simulate_pair(replace(base, length=max(max(lengths), base.length)))
    points = []
    for length in tqdm(lengths, desc="length sweep", leave=False):
        logging.info(f"Length sweep: L={length}")
        points.append(SweepPoint("length", float(length), run_pipeline(cfg, x.head(length), y.head(length), workers)))
    return points


def coupling_sweep(cfg: AnalysisConfig, couplings: Sequence[float] = COUPLINGS,
                   workers: Optional[int] = None) -> List[SweepPoint]:
    """One fresh simulation per value of the x->y coupling"""
    base: LogisticMapConfig = PRESETS["logistic-coupling"]
    points = []
    for value in tqdm(couplings, desc="coupling sweep", leave=False):
        logging.info(f"Coupling sweep: C={value}")
        x, y = _simulate_pair(base.with_coupling(1, 0, value))
        points.append(SweepPoint("coupling", float(value), run_pipeline(cfg, x, y, workers)))
    return points


def noise_sweep(cfg: AnalysisConfig, snrs: Sequence[float] = SNRS,
                workers: Optional[int] = None) -> List[SweepPoint]:
    """Same clean run with independent observation noise on each series"""
    x, y = _simulate_pair(PRESETS["logistic-noise"])
    points = []
    for snr in tqdm(snrs, desc="noise sweep", leave=False):
        logging.info(f"Noise sweep: SNR={snr:g}")
        noisy_x = add_observational_noise(x, NoiseConfig(snr, cfg.seed))
        noisy_y = add_observational_noise(y, NoiseConfig(snr, cfg.seed + 1))
        points.append(SweepPoint("snr", float(snr), run_pipeline(cfg, noisy_x, noisy_y, workers)))
    return points


def embedding_sweep(cfg: AnalysisConfig, dimensions: Sequence[int] = DIMENSIONS,
                    length: int = EMBEDDING_SWEEP_LENGTH, workers: Optional[int] = None) -> List[SweepPoint]:
    """Noise-free long run analyzed at every embedding dimension"""
    x, y = _simulate_pair(replace(PRESETS["logistic-noise"], length=length))
    points = []
    for dimension in tqdm(dimensions, desc="embedding sweep", leave=False):
        logging.info(f"Embedding sweep: E={dimension}")
        point_cfg = replace(cfg, embedding=EmbeddingConfig(dimension, cfg.embedding.delay), coordinate=0)
        points.append(SweepPoint("dimension", float(dimension), run_pipeline(point_cfg, x, y, workers)))
    return points


SWEEPS: Dict[str, Callable[..., List[SweepPoint]]] = {
    "length": length_sweep,
    "coupling": coupling_sweep,
    "noise": noise_sweep,
    "embedding": embedding_sweep,
}


def run_sweep(name: str, cfg: AnalysisConfig, workers: Optional[int] = None) -> List[SweepPoint]:
    if name not in SWEEPS:
        raise UsageError(f"Unknown sweep: {name}. Available: {', '.join(SWEEPS)}")
    return SWEEPS[name](cfg, workers=workers)


def summarize_sweep(points: Sequence[SweepPoint]) -> List[Tuple[float, float, float]]:
    """(value, forward mean strength, backward mean strength) per sweep point"""
    rows = []
    for point in points:
        bundle = point.bundle
        rows.append((point.value,
                     bundle.strength(bundle.forward).mean_strength(),
                     bundle.strength(bundle.backward).mean_strength()))
    return rows
