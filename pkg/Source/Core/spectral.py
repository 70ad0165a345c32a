import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy import signal as scipy_signal

from Utils.errors import InvalidArgumentError
from .timeseries import TimeSeries

MIN_SEGMENT_LENGTH = 8
MAX_DEFAULT_SEGMENT = 256


@dataclass(frozen=True)
class SpectralConfig:
    """Welch estimator settings

    Args:
        segment_length: Samples per segment. None picks the default for the
            series length at hand (see default_segment_length).
        overlap_fraction: Fraction of a segment shared with the next one
        window: Any taper name scipy.signal.get_window understands
        detrend_per_segment: Remove each segment's mean before the FFT
    """
    segment_length: Optional[int] = None
    overlap_fraction: float = 0.5
    window: str = "hann"
    detrend_per_segment: bool = True

    def __post_init__(self):
        if self.segment_length is not None and self.segment_length < MIN_SEGMENT_LENGTH:
            raise InvalidArgumentError(
                f"segment_length must be at least {MIN_SEGMENT_LENGTH}, got {self.segment_length}")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise InvalidArgumentError(f"overlap_fraction must lie in [0, 1), got {self.overlap_fraction}")
        try:
            scipy_signal.get_window(self.window, MIN_SEGMENT_LENGTH)
        except ValueError as e:
            raise InvalidArgumentError(f"Unknown window {self.window!r}: {e}") from e

    def resolve(self, n_samples: int) -> "SpectralConfig":
        """Copy with the segment length fixed for a series of n_samples"""
        if self.segment_length is not None:
            return self
        return SpectralConfig(default_segment_length(n_samples), self.overlap_fraction,
                              self.window, self.detrend_per_segment)

    def overlap(self, segment_length: int) -> int:
        return int(np.floor(self.overlap_fraction * segment_length))


def default_segment_length(n_samples: int) -> int:
    """256 samples or the largest power of two <= n/8, whichever is smaller"""
    if n_samples < 8 * MIN_SEGMENT_LENGTH:
        raise InvalidArgumentError(
            f"Series of {n_samples} samples too short for a default segment length "
            f"(need at least {8 * MIN_SEGMENT_LENGTH})")
    power = 2 ** int(np.floor(np.log2(n_samples / 8)))
    return int(min(MAX_DEFAULT_SEGMENT, power))


def segment_count(n_samples: int, segment_length: int, overlap: int) -> int:
    if n_samples < segment_length:
        return 0
    return 1 + (n_samples - segment_length) // (segment_length - overlap)


@dataclass(frozen=True, eq=False)
class SpectralEstimate:
    frequencies: np.ndarray
    values: np.ndarray
    segments: int


@dataclass(frozen=True, eq=False)
class CoherenceCurve:
    """Magnitude coherence per frequency; degenerate marks bins with zero power"""
    frequencies: np.ndarray
    coherence: np.ndarray
    degenerate: np.ndarray


def _welch_arguments(series: TimeSeries, cfg: SpectralConfig) -> Tuple[dict, int]:
    cfg = cfg.resolve(len(series))
    nperseg = cfg.segment_length
    noverlap = cfg.overlap(nperseg)
    segments = segment_count(len(series), nperseg, noverlap)
    if segments < 2:
        raise InvalidArgumentError(
            f"Welch estimate needs at least 2 segments; {len(series)} samples give {segments} "
            f"with segment_length={nperseg}, overlap={noverlap}")
    return dict(
        fs=series.sample_rate,
        window=cfg.window,
        nperseg=nperseg,
        noverlap=noverlap,
        detrend="constant" if cfg.detrend_per_segment else False,
        return_onesided=True,
        scaling="density",
        average="mean",
    ), segments


def _check_pair(a: TimeSeries, b: TimeSeries) -> None:
    if len(a) != len(b):
        raise InvalidArgumentError(f"Length mismatch: {len(a)} vs {len(b)}")
    if a.sample_rate != b.sample_rate:
        raise InvalidArgumentError(f"Sample rate mismatch: {a.sample_rate} vs {b.sample_rate}")


def welch_psd(series: TimeSeries, cfg: SpectralConfig = SpectralConfig()) -> SpectralEstimate:
    """One-sided, window-power normalised Welch power spectral density"""
    kwargs, segments = _welch_arguments(series, cfg)
    # Same code path as welch_csd(a, a): scipy's welch is the real part of csd(x, x)
    frequencies, pxx = scipy_signal.csd(series.samples, series.samples, **kwargs)
    return SpectralEstimate(frequencies, np.real(pxx), segments)


def welch_csd(a: TimeSeries, b: TimeSeries, cfg: SpectralConfig = SpectralConfig()) -> SpectralEstimate:
    """Segment-averaged cross-spectral density conj(A) * B"""
    _check_pair(a, b)
    kwargs, segments = _welch_arguments(a, cfg)
    frequencies, pxy = scipy_signal.csd(a.samples, b.samples, **kwargs)
    return SpectralEstimate(frequencies, pxy, segments)


def coherence(a: TimeSeries, b: TimeSeries, cfg: SpectralConfig = SpectralConfig()) -> CoherenceCurve:
    """|S_ab| / sqrt(S_aa S_bb), clamped to [0, 1]"""
    _check_pair(a, b)
    sab = welch_csd(a, b, cfg)
    saa = welch_psd(a, cfg).values
    sbb = welch_psd(b, cfg).values
    return _coherence_from_spectra(sab.frequencies, sab.values, saa, sbb)


def _coherence_from_spectra(frequencies: np.ndarray, sab: np.ndarray,
                            saa: np.ndarray, sbb: np.ndarray) -> CoherenceCurve:
    tiny = np.finfo(float).eps ** 2
    degenerate = (saa <= tiny * max(saa.max(), tiny)) | (sbb <= tiny * max(sbb.max(), tiny))
    values = np.zeros_like(saa)
    ok = ~degenerate
    values[ok] = np.abs(sab[ok]) / np.sqrt(saa[ok] * sbb[ok])
    values = np.clip(values, 0.0, 1.0)

    if np.any(degenerate):
        logging.debug(f"{int(degenerate.sum())} coherence bins have zero power and were set to 0")
    return CoherenceCurve(frequencies, values, degenerate)


def coherence_arrays(a: Union[np.ndarray, TimeSeries], b: Union[np.ndarray, TimeSeries],
                     sample_rate: float, cfg: SpectralConfig = SpectralConfig()) -> CoherenceCurve:
    """coherence() for bare sample arrays sharing one sample rate"""
    if not isinstance(a, TimeSeries):
        a = TimeSeries(a, sample_rate)
    if not isinstance(b, TimeSeries):
        b = TimeSeries(b, sample_rate)
    return coherence(a, b, cfg)
