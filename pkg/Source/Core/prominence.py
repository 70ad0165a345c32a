"""Peak prominence and the per-band causal strength / effect delay readout."""

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import signal as scipy_signal

from Utils.errors import InvalidArgumentError
from .shift_scan import CmcSurface


@dataclass(frozen=True)
class Peak:
    index: int
    height: float
    prominence: float


class StrengthReading(NamedTuple):
    strength: float
    delay: Optional[int]
    granger_delay: Optional[int] = None
    granger_height: float = 0.0


@dataclass(frozen=True, eq=False)
class CausalStrengthProfile:
    frequencies: np.ndarray
    strength: np.ndarray
    delay: Tuple[Optional[int], ...]
    direction_label: str
    granger_delay: Tuple[Optional[int], ...] = ()

    def mean_strength(self, f_min: Optional[float] = None, f_max: Optional[float] = None) -> float:
        return float(np.mean(self.strength[self._band(f_min, f_max)]))

    def band_integral(self, f_min: float, f_max: float) -> float:
        """Strength summed over [f_min, f_max] times the bin width"""
        band = self._band(f_min, f_max)
        width = float(self.frequencies[1] - self.frequencies[0]) if self.frequencies.size > 1 else 1.0
        return float(np.sum(self.strength[band]) * width)

    def peak_frequency(self, f_min: Optional[float] = None, f_max: Optional[float] = None) -> float:
        band = np.flatnonzero(self._band(f_min, f_max))
        return float(self.frequencies[band[np.argmax(self.strength[band])]])

    def _band(self, f_min: Optional[float], f_max: Optional[float]) -> np.ndarray:
        lo = -np.inf if f_min is None else f_min
        hi = np.inf if f_max is None else f_max
        band = (self.frequencies >= lo) & (self.frequencies <= hi)
        if not band.any():
            raise InvalidArgumentError(f"No frequency bins inside [{f_min}, {f_max}] Hz")
        return band


def find_peaks(values: Sequence[float]) -> List[Peak]:
    """Strict local maxima with topographic prominence

    Plateaus count once, at their midpoint rounded down. The global maximum's
    prominence is its height above 0.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size < 3:
        raise InvalidArgumentError(f"Peak search needs at least 3 values, got {values.size}")

    indices, _ = scipy_signal.find_peaks(values)
    if indices.size == 0:
        return []
    prominences = scipy_signal.peak_prominences(values, indices)[0]
    top = values.max()

    peaks = []
    for index, prominence in zip(indices, prominences):
        height = float(values[index])
        if height == top:
            prominence = height
        peaks.append(Peak(int(index), height, float(prominence)))
    return peaks


def _nearest_zero(candidates: Sequence[int], shifts: np.ndarray) -> int:
    return min(candidates, key=lambda i: (abs(int(shifts[i])), int(shifts[i])))


def causal_strength(curve: Sequence[float], shifts: Sequence[int], E: int,
                    max_delay: Optional[int] = None) -> StrengthReading:
    """Causal strength and delay of one shift-dependent curve

    The causal side is every shift below max_delay (default E * step). If the
    absolute maximum sits there its height is the strength; otherwise the most
    prominent causal-side peak counts, and anti-causal (Granger) peaks never do.
    """
    curve = np.asarray(curve, dtype=float).ravel()
    shifts = np.asarray(shifts).ravel()
    if curve.size != shifts.size:
        raise InvalidArgumentError(f"Curve has {curve.size} values for {shifts.size} shifts")
    if E < 1:
        raise InvalidArgumentError(f"E must be positive, got {E}")
    if max_delay is None:
        step = int(np.min(np.diff(shifts))) if shifts.size > 1 else 1
        max_delay = E * step

    top = float(curve.max())
    if top <= 0.0:
        return StrengthReading(0.0, None)

    causal = shifts < max_delay
    granger_delay, granger_height = None, 0.0
    peaks = find_peaks(curve) if curve.size >= 3 else []
    anti = [p for p in peaks if not causal[p.index]]
    if anti:
        best = max(anti, key=lambda p: p.height)
        granger_delay, granger_height = int(shifts[best.index]), best.height

    at_top = [i for i in np.flatnonzero(curve == top) if causal[i]]
    if at_top:
        index = _nearest_zero(at_top, shifts)
        return StrengthReading(top, int(shifts[index]), granger_delay, granger_height)

    candidates = [p for p in peaks if causal[p.index]]
    if not candidates:
        return StrengthReading(0.0, None, granger_delay, granger_height)
    best_prominence = max(p.prominence for p in candidates)
    tied = [p.index for p in candidates if p.prominence == best_prominence]
    index = _nearest_zero(tied, shifts)
    return StrengthReading(float(best_prominence), int(shifts[index]), granger_delay, granger_height)


def strength_profile(surface: CmcSurface, E: int, max_delay: Optional[int] = None) -> CausalStrengthProfile:
    """causal_strength applied to each frequency column"""
    readings = [causal_strength(surface.values[:, j], surface.shifts, E, max_delay)
                for j in range(surface.values.shape[1])]
    return CausalStrengthProfile(
        frequencies=surface.frequencies.copy(),
        strength=np.array([r.strength for r in readings]),
        delay=tuple(r.delay for r in readings),
        direction_label=surface.direction_label,
        granger_delay=tuple(r.granger_delay for r in readings),
    )
