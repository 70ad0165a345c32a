import numpy as np
import pytest

from Core.prominence import CausalStrengthProfile, causal_strength, find_peaks, strength_profile
from Core.shift_scan import CmcSurface
from Utils.errors import InvalidArgumentError


def contour_peaks(values):
    """Walk-outward prominence: the higher of the two side minima is the base"""
    values = list(values)
    top = max(values)
    peaks = []
    i = 1
    while i < len(values) - 1:
        if values[i] > values[i - 1]:
            j = i
            while j + 1 < len(values) - 1 and values[j + 1] == values[i]:
                j += 1
            if values[j + 1] < values[i]:
                index = (i + j) // 2
                height = values[index]
                if height == top:
                    prominence = height
                else:
                    left = index
                    left_min = height
                    while left > 0 and values[left - 1] <= height:
                        left -= 1
                        left_min = min(left_min, values[left])
                    right = index
                    right_min = height
                    while right < len(values) - 1 and values[right + 1] <= height:
                        right += 1
                        right_min = min(right_min, values[right])
                    prominence = height - max(left_min, right_min)
                peaks.append((index, prominence))
            i = j + 1
        else:
            i += 1
    return peaks


def test_single_peak():
    peaks = find_peaks([0.0, 1.0, 0.0])
    assert [(p.index, p.height, p.prominence) for p in peaks] == [(1, 1.0, 1.0)]


def test_two_peaks():
    peaks = find_peaks([0.0, 3.0, 1.0, 2.0, 0.0])
    assert [(p.index, p.prominence) for p in peaks] == [(1, 3.0), (3, 1.0)]


def test_plateau_counts_once_at_midpoint():
    peaks = find_peaks([0.0, 2.0, 2.0, 2.0, 2.0, 0.0, 1.0, 0.0])
    assert [p.index for p in peaks] == [2, 6]


def test_no_interior_peak():
    assert find_peaks([0.0, 1.0, 2.0, 3.0]) == []
    with pytest.raises(InvalidArgumentError):
        find_peaks([1.0, 2.0])


def test_prominence_matches_contour_walk_on_integer_sequences(rng):
    for _ in range(50):
        values = rng.integers(0, 12, size=200).astype(float)
        expected = contour_peaks(values)
        actual = [(p.index, p.prominence) for p in find_peaks(values)]
        assert actual == expected


def test_prominence_matches_contour_walk_on_real_sequences(rng):
    for _ in range(50):
        values = rng.uniform(size=200)
        expected = contour_peaks(values)
        actual = find_peaks(values)
        assert [p.index for p in actual] == [index for index, _ in expected]
        assert np.allclose([p.prominence for p in actual], [prom for _, prom in expected])


def test_prominence_bounded_by_height(rng):
    values = rng.uniform(size=300)
    for peak in find_peaks(values):
        assert 0.0 < peak.prominence <= peak.height


def test_global_maximum_on_causal_side():
    shifts = np.arange(-5, 6)
    curve = np.zeros(shifts.size)
    curve[shifts == -3] = 0.8
    reading = causal_strength(curve, shifts, E=2)
    assert (reading.strength, reading.delay) == (0.8, -3)


def test_anti_causal_maximum_is_reported_but_excluded():
    shifts = np.arange(-10, 11)
    curve = np.full(shifts.size, 0.1)
    curve[shifts == -2] = 0.4
    curve[shifts == 6] = 0.9
    reading = causal_strength(curve, shifts, E=2)
    assert reading.strength == pytest.approx(0.3)
    assert reading.delay == -2
    assert reading.granger_delay == 6
    assert reading.granger_height == pytest.approx(0.9)


def test_monotone_increasing_curve_has_no_strength():
    shifts = np.arange(-5, 6)
    reading = causal_strength(np.linspace(0.1, 0.9, shifts.size), shifts, E=2)
    assert reading.strength == 0.0 and reading.delay is None


def test_non_positive_curve():
    shifts = np.arange(-3, 4)
    assert causal_strength(np.zeros(7), shifts, E=2) == (0.0, None, None, 0.0)


def test_ties_resolve_toward_zero_shift():
    shifts = np.arange(-5, 6)
    curve = np.zeros(shifts.size)
    curve[shifts == -4] = 0.6
    curve[shifts == -1] = 0.6
    assert causal_strength(curve, shifts, E=2).delay == -1


def test_max_delay_overrides_threshold():
    shifts = np.arange(-5, 6)
    curve = np.zeros(shifts.size)
    curve[shifts == 1] = 0.7
    assert causal_strength(curve, shifts, E=2).delay == 1
    reading = causal_strength(curve, shifts, E=2, max_delay=0)
    assert reading.strength == 0.0 and reading.granger_delay == 1


def test_delay_always_on_causal_side(rng):
    shifts = np.arange(-20, 21, 2)
    for _ in range(50):
        reading = causal_strength(rng.uniform(size=shifts.size), shifts, E=3)
        if reading.delay is not None:
            assert reading.delay < 3 * 2


def test_positive_homogeneity(rng):
    shifts = np.arange(-10, 11)
    curve = rng.uniform(size=shifts.size)
    base = causal_strength(curve, shifts, E=2)
    scaled = causal_strength(2.5 * curve, shifts, E=2)
    assert scaled.strength == pytest.approx(2.5 * base.strength)
    assert scaled.delay == base.delay


def test_tall_anti_causal_peak_never_adds_strength(rng):
    shifts = np.arange(-10, 11)
    for _ in range(50):
        curve = rng.uniform(size=shifts.size)
        before = causal_strength(curve, shifts, E=2).strength
        boosted = curve.copy()
        boosted[shifts == 8] = curve.max() + 1.0
        assert causal_strength(boosted, shifts, E=2).strength <= before + 1e-12


def test_length_mismatch():
    with pytest.raises(InvalidArgumentError):
        causal_strength([0.1, 0.2], [0, 1, 2], E=2)


def test_strength_profile_per_column():
    shifts = np.arange(-5, 6)
    values = np.zeros((shifts.size, 3))
    values[shifts == -3, 0] = 0.8
    values[shifts == -1, 2] = 0.5
    surface = CmcSurface(shifts, np.array([1.0, 2.0, 3.0]), values, "x→y")
    profile = strength_profile(surface, E=2)
    assert profile.strength.tolist() == [0.8, 0.0, 0.5]
    assert profile.delay == (-3, None, -1)
    assert profile.direction_label == "x→y"


def test_all_zero_surface():
    surface = CmcSurface(np.arange(-2, 3), np.arange(4.0), np.zeros((5, 4)), "x→y")
    profile = strength_profile(surface, E=2)
    assert np.all(profile.strength == 0.0)
    assert all(d is None for d in profile.delay)


def test_profile_band_helpers():
    profile = CausalStrengthProfile(np.array([0.0, 1.0, 2.0, 3.0]), np.array([0.1, 0.4, 0.2, 0.3]),
                                    (None, -1, -1, -2), "x→y")
    assert profile.mean_strength() == pytest.approx(0.25)
    assert profile.mean_strength(1.0, 2.0) == pytest.approx(0.3)
    assert profile.band_integral(1.0, 3.0) == pytest.approx(0.9)
    assert profile.peak_frequency() == 1.0
    assert profile.peak_frequency(2.0, 3.0) == 3.0
    with pytest.raises(InvalidArgumentError):
        profile.mean_strength(10.0, 20.0)
