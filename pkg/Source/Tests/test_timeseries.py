import numpy as np
import pytest

from Core.timeseries import NoiseConfig, TimeSeries, add_observational_noise, pearson_r2, subsample
from Utils.errors import DegenerateInputError, InvalidArgumentError


def test_rejects_non_finite_samples():
    with pytest.raises(InvalidArgumentError, match="index 2"):
        TimeSeries([0.0, 1.0, np.nan])
    with pytest.raises(InvalidArgumentError):
        TimeSeries([0.0, np.inf])


def test_rejects_bad_sample_rate_and_empty():
    with pytest.raises(InvalidArgumentError):
        TimeSeries([1.0, 2.0], sample_rate=0.0)
    with pytest.raises(InvalidArgumentError):
        TimeSeries([])


def test_samples_are_read_only():
    series = TimeSeries([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        series.samples[0] = 5.0


def test_segment_keeps_time_axis():
    series = TimeSeries(np.arange(10.0), sample_rate=2.0, t0=1.0)
    part = series.segment(4, 8)
    assert part.samples.tolist() == [4.0, 5.0, 6.0, 7.0]
    assert part.t0 == pytest.approx(3.0)
    with pytest.raises(InvalidArgumentError):
        series.segment(5, 11)


def test_subsample_keeps_every_factor_th_sample():
    series = TimeSeries([0, 1, 2, 3, 4, 5], sample_rate=4.0)
    half = subsample(series, 2)
    assert half.samples.tolist() == [0.0, 2.0, 4.0]
    assert half.sample_rate == 2.0


def test_subsample_identity_and_errors():
    series = TimeSeries([3.0, 1.0, 2.0])
    assert np.array_equal(subsample(series, 1).samples, series.samples)
    with pytest.raises(InvalidArgumentError):
        subsample(series, 0)
    with pytest.raises(InvalidArgumentError):
        subsample(series, 4)


def test_subsample_lorenz_rate():
    series = TimeSeries(np.zeros(1000), sample_rate=1000.0)
    assert subsample(series, 100).sample_rate == pytest.approx(10.0)


def test_subsample_composes(rng):
    series = TimeSeries(rng.standard_normal(120))
    assert np.array_equal(subsample(subsample(series, 2), 3).samples, subsample(series, 6).samples)


def test_noise_negligible_at_huge_snr(rng):
    series = TimeSeries(rng.standard_normal(1000))
    noisy = add_observational_noise(series, NoiseConfig(1e12, seed=1))
    assert np.max(np.abs(noisy.samples - series.samples)) < 1e-4 * np.std(series.samples)


def test_noise_is_seeded():
    series = TimeSeries(np.sin(np.arange(500) / 7.0))
    a = add_observational_noise(series, NoiseConfig(1.0, seed=9))
    b = add_observational_noise(series, NoiseConfig(1.0, seed=9))
    assert np.array_equal(a.samples, b.samples)
    assert len(a) == len(series) and a.sample_rate == series.sample_rate


def test_noise_variance_matches_snr(rng):
    raw = rng.standard_normal(10000)
    series = TimeSeries((raw - raw.mean()) / raw.std())
    noisy = add_observational_noise(series, NoiseConfig(10.0, seed=3))
    assert np.var(noisy.samples - series.samples) == pytest.approx(0.1, rel=0.05)


def test_noise_on_constant_signal_is_degenerate():
    with pytest.raises(DegenerateInputError):
        add_observational_noise(TimeSeries(np.ones(10)), NoiseConfig(10.0))


def test_noise_config_validation():
    with pytest.raises(InvalidArgumentError):
        NoiseConfig(0.0)


def test_pearson_examples():
    assert pearson_r2([1, 2, 3, 4], [1, 2, 3, 4]) == pytest.approx(1.0)
    assert pearson_r2([1, 2, 3], [3, 2, 1]) == pytest.approx(1.0)


def test_pearson_independent_is_small(rng):
    a = rng.uniform(size=10000)
    b = rng.uniform(size=10000)
    assert pearson_r2(a, b) < 0.01


def test_pearson_symmetric_and_affine_invariant(rng):
    a = rng.standard_normal(200)
    b = 0.5 * a + rng.standard_normal(200)
    assert pearson_r2(a, b) == pytest.approx(pearson_r2(b, a), abs=1e-14)
    assert pearson_r2(-3.0 * a + 7.0, b) == pytest.approx(pearson_r2(a, b), abs=1e-12)


def test_pearson_errors():
    with pytest.raises(DegenerateInputError):
        pearson_r2([1, 1, 1], [1, 2, 3])
    with pytest.raises(InvalidArgumentError):
        pearson_r2([1, 2], [1, 2])
    with pytest.raises(InvalidArgumentError):
        pearson_r2([1, 2, 3], [1, 2, 3, 4])
