from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from Utils.errors import DegenerateInputError, InvalidArgumentError

ArrayLike = Union[Sequence[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled scalar signal

    Attributes:
        samples: Read-only float64 array of finite values
        sample_rate: Samples per second (Hz)
        t0: Time of the first sample in seconds
        name: Column label used in CSV files and direction labels
    """
    samples: np.ndarray
    sample_rate: float = 1.0
    t0: float = 0.0
    name: str = ""

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float).ravel()
        if samples.size < 1:
            raise InvalidArgumentError("TimeSeries needs at least one sample")
        if not np.all(np.isfinite(samples)):
            bad = int(np.flatnonzero(~np.isfinite(samples))[0])
            raise InvalidArgumentError(f"Non-finite sample at index {bad}")
        if not np.isfinite(self.sample_rate) or self.sample_rate <= 0:
            raise InvalidArgumentError(f"sample_rate must be positive, got {self.sample_rate}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    def with_samples(self, samples: ArrayLike, start: int = 0) -> "TimeSeries":
        """New series sharing rate and name, first sample at index start of this one"""
        return TimeSeries(samples, self.sample_rate, self.t0 + start * self.dt, self.name)

    def segment(self, start: int, stop: int) -> "TimeSeries":
        if not 0 <= start < stop <= len(self):
            raise InvalidArgumentError(f"Segment [{start}, {stop}) outside series of length {len(self)}")
        return self.with_samples(self.samples[start:stop], start)

    def head(self, count: int) -> "TimeSeries":
        return self.segment(0, min(count, len(self)))

    def renamed(self, name: str) -> "TimeSeries":
        return TimeSeries(self.samples, self.sample_rate, self.t0, name)


@dataclass(frozen=True)
class NoiseConfig:
    snr: float
    seed: int = 0

    def __post_init__(self):
        if not self.snr > 0:
            raise InvalidArgumentError(f"snr must be positive, got {self.snr}")
        if self.seed < 0:
            raise InvalidArgumentError("seed must be a non-negative integer")


def subsample(series: TimeSeries, factor: int) -> TimeSeries:
    """Keep every factor-th sample starting at index 0"""
    if factor < 1:
        raise InvalidArgumentError(f"Subsampling factor must be >= 1, got {factor}")
    if len(series) < factor:
        raise InvalidArgumentError(
            f"Series of length {len(series)} is shorter than subsampling factor {factor}")
    return TimeSeries(series.samples[::factor], series.sample_rate / factor, series.t0, series.name)


def add_observational_noise(series: TimeSeries, cfg: NoiseConfig) -> TimeSeries:
    """Add i.i.d. Gaussian noise with variance var(series) / snr

    SNR is a power ratio. The same seed always yields the same noise.
    """
    if len(series) < 2:
        raise InvalidArgumentError("Noise injection needs at least 2 samples")
    variance = float(np.var(series.samples))
    if variance == 0.0:
        raise DegenerateInputError("SNR is undefined for a zero-variance signal")

    rng = np.random.default_rng(cfg.seed)
    noise = rng.normal(0.0, np.sqrt(variance / cfg.snr), size=len(series))
    return TimeSeries(series.samples + noise, series.sample_rate, series.t0, series.name)


def pearson_r2(a: ArrayLike, b: ArrayLike) -> float:
    """Squared Pearson correlation coefficient of two equal-length sequences"""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size:
        raise InvalidArgumentError(f"Length mismatch: {a.size} vs {b.size}")
    if a.size < 3:
        raise InvalidArgumentError("pearson_r2 needs at least 3 samples")

    da = a - a.mean()
    db = b - b.mean()
    saa = float(np.dot(da, da))
    sbb = float(np.dot(db, db))
    if saa == 0.0 or sbb == 0.0:
        raise DegenerateInputError("Correlation is undefined for zero-variance input")

    r = float(np.dot(da, db)) / np.sqrt(saa * sbb)
    return float(min(1.0, r * r))
