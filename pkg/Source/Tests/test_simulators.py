import json
from pathlib import Path

import numpy as np
import pytest

from Core.simulators import (PRESETS, KuramotoConfig, KuramotoSimulator, LogisticMapConfig,
                             LogisticMapSimulator, LorenzConfig, LorenzSimulator, WilsonCowanConfig,
                             WilsonCowanSimulator, create_simulator, mirror_unit_interval, preset_names,
                             transduction)
from Core.timeseries import subsample
from Utils.errors import InvalidArgumentError, ParseError, UsageError

EXAMPLE_WEIGHTS = Path(__file__).resolve().parents[1] / "Configs" / "wilson_cowan_example.json"


def _single_population(sigma=0.0, external=0.5, **kwargs):
    return WilsonCowanConfig(populations=("E",), tau=(0.01,), sigma=(sigma,), weights=((0.0,),),
                             external=(external,), **kwargs)


def test_logistic_single_map_example():
    cfg = LogisticMapConfig(rates=(4.0,), coupling=((1.0,),), length=3, initial_state=(0.5,))
    (series,) = LogisticMapSimulator(cfg).simulate()
    assert series.samples.tolist() == [0.5, 1.0, 0.0]


def test_mirror_unit_interval():
    assert mirror_unit_interval(np.array([1.1, -0.2, 2.3, 1.0, 0.4])) == pytest.approx([0.9, 0.2, 0.3, 1.0, 0.4])


def test_logistic_presets_stay_in_unit_interval():
    for name in ("logistic-uni", "logistic-circ", "logistic-hidden", "logistic-indep"):
        for series in create_simulator(name, length=2000).simulate():
            assert np.all((series.samples >= 0.0) & (series.samples <= 1.0))


def test_logistic_is_deterministic():
    a = create_simulator("logistic-uni", length=500).simulate()
    b = create_simulator("logistic-uni", length=500).simulate()
    assert all(np.array_equal(p.samples, q.samples) for p, q in zip(a, b))
    assert [s.name for s in a] == ["x", "y"]


def test_logistic_burn_in_drops_transient():
    full = create_simulator("logistic-uni", length=600).simulate()[0]
    trimmed = create_simulator("logistic-uni", length=500, burn_in=100).simulate()[0]
    assert np.array_equal(trimmed.samples, full.samples[100:])


def test_logistic_config_validation():
    with pytest.raises(InvalidArgumentError):
        LogisticMapConfig(rates=(3.9, 3.9), coupling=((0.5, 0.0), (0.0, 1.0)))
    with pytest.raises(InvalidArgumentError):
        LogisticMapConfig(rates=(3.9,), coupling=((1.0,),), initial_state=(1.5,))
    with pytest.raises(InvalidArgumentError):
        LogisticMapConfig(rates=(3.9, 3.9), coupling=((1.0,),))


def test_with_coupling_sets_one_entry():
    cfg = PRESETS["logistic-coupling"].with_coupling(1, 0, 0.15)
    assert cfg.coupling == ((1.0, 0.0), (0.15, 1.0))


def test_lorenz_origin_is_fixed():
    sim = LorenzSimulator(LorenzConfig(steps=100, initial_state=(0.0,) * 6))
    assert sim.derivative((0.0,) * 6) == (0.0,) * 6
    assert all(np.all(s.samples == 0.0) for s in sim.simulate())


def test_uncoupled_identical_lorenz_systems_stay_identical():
    cfg = LorenzConfig(sigma=(10.0, 10.0), rho=(28.0, 28.0), beta=(8 / 3, 8 / 3), kappa=(0.0, 0.0),
                       steps=2000, initial_state=(1.0, 1.0, 1.0, 1.0, 1.0, 1.0))
    x1, y1, z1, x2, y2, z2 = LorenzSimulator(cfg).simulate()
    assert np.array_equal(x1.samples, x2.samples)
    assert np.array_equal(z1.samples, z2.samples)


def test_lorenz_record_every_matches_subsampling():
    full = LorenzSimulator(LorenzConfig(steps=1000)).simulate()
    sparse = LorenzSimulator(LorenzConfig(steps=1000, record_every=10)).simulate()
    assert len(sparse[0]) == 101
    assert sparse[0].sample_rate == pytest.approx(100.0)
    for a, b in zip(sparse, full):
        assert np.array_equal(a.samples, subsample(b, 10).samples)


def test_lorenz_stays_bounded():
    series = create_simulator("lorenz-uni", steps=20000, record_every=10).simulate()
    assert [s.name for s in series] == list(LorenzSimulator.NAMES)
    assert all(np.max(np.abs(s.samples)) < 100.0 for s in series)


def test_free_kuramoto_oscillator_is_a_sine():
    cfg = KuramotoConfig(base_frequencies=(1.0,), couplings=(0.0,), noise_std=0.0, dt=1e-3, steps=1000,
                         names=("z",))
    (series,) = KuramotoSimulator(cfg).simulate()
    t = np.arange(1000) * 1e-3
    assert np.allclose(series.samples, np.sin(2 * np.pi * t), atol=1e-9)
    assert series.sample_rate == pytest.approx(1000.0)


def test_kuramoto_mean_phase_velocity():
    cfg = KuramotoConfig(base_frequencies=(10.5,), couplings=(0.0,), names=("z",))
    theta = KuramotoSimulator(cfg).phases()[:, 0]
    velocity = (theta[-1] - theta[0]) / ((cfg.steps - 1) * cfg.dt)
    assert velocity == pytest.approx(2 * np.pi * 10.5, rel=0.01)


def test_kuramoto_default_network():
    sim = create_simulator("kuramoto-3", steps=2000)
    series = sim.simulate()
    assert [s.name for s in series] == ["z", "x", "y"]
    assert sim.sample_rate == pytest.approx(200.0)
    again = create_simulator("kuramoto-3", steps=2000).simulate()
    assert all(np.array_equal(a.samples, b.samples) for a, b in zip(series, again))
    other = create_simulator("kuramoto-3", steps=2000, seed=5).simulate()
    assert not np.array_equal(series[1].samples, other[1].samples)


def test_kuramoto_coupling_sign_options_differ():
    base = KuramotoConfig(steps=500, noise_std=0.0)
    plain = KuramotoSimulator(base).phases()
    attractive = KuramotoSimulator(KuramotoConfig(steps=500, noise_std=0.0, attractive=True)).phases()
    assert np.array_equal(plain[:, 0], attractive[:, 0])
    assert not np.array_equal(plain[:, 1], attractive[:, 1])


def test_transduction():
    assert transduction(0.0) == pytest.approx(1.0)
    assert transduction(np.array([-1e-10, 1e-10])) == pytest.approx([1.0, 1.0])
    assert transduction(np.array([50.0]))[0] == pytest.approx(50.0)
    assert transduction(np.array([1.0]))[0] == pytest.approx(1.0 / (1.0 - np.exp(-1.0)))


def test_wilson_cowan_fixed_point_without_noise():
    drive = float(transduction(0.5))
    cfg = _single_population(steps=200, realizations=1, initial_rates=(drive,))
    (series,) = WilsonCowanSimulator(cfg).simulate()
    assert np.all(series.samples == drive)


def test_wilson_cowan_noise_scales_linearly():
    weak = WilsonCowanSimulator(_single_population(sigma=0.01, steps=1000, seed=3)).simulate()[0]
    strong = WilsonCowanSimulator(_single_population(sigma=0.02, steps=1000, seed=3)).simulate()[0]
    rest = float(transduction(0.5))
    assert np.allclose(strong.samples - rest, 2.0 * (weak.samples - rest), rtol=1e-9, atol=1e-12)
    assert np.var(strong.samples) == pytest.approx(4.0 * np.var(weak.samples), rel=1e-6)


def test_wilson_cowan_realizations_are_seeded():
    cfg = _single_population(sigma=0.05, steps=300, realizations=3, seed=11)
    runs = WilsonCowanSimulator(cfg).simulate_realizations()
    again = WilsonCowanSimulator(cfg).simulate_realizations()
    assert len(runs) == 3
    assert not np.array_equal(runs[0][0].samples, runs[1][0].samples)
    assert all(np.array_equal(a[0].samples, b[0].samples) for a, b in zip(runs, again))


def test_wilson_cowan_recording():
    cfg = _single_population(sigma=0.05, steps=100, record_every=5, burn_in=20)
    (series,) = WilsonCowanSimulator(cfg).simulate()
    assert len(series) == 20
    assert series.sample_rate == pytest.approx(1000.0)


def test_example_weight_file_loads():
    cfg = WilsonCowanConfig.load(EXAMPLE_WEIGHTS)
    assert len(cfg.populations) == 8
    assert set(cfg.areas) == {"V1", "V4"}
    sim = WilsonCowanSimulator(cfg)
    populations = [s.head(10) for s in WilsonCowanSimulator(
        WilsonCowanConfig.from_dict({**json.loads(EXAMPLE_WEIGHTS.read_text()), "steps": 50, "burn_in": 0})
    ).simulate()]
    areas = sim.area_signals(populations)
    assert [a.name for a in areas] == ["V1", "V4"]
    assert np.array_equal(areas[0].samples, populations[0].samples)


def test_weight_file_errors(tmp_path):
    with pytest.raises(UsageError):
        WilsonCowanConfig.load(tmp_path / "missing.json")

    broken = tmp_path / "broken.json"
    broken.write_text('{\n  "populations": [\n')
    with pytest.raises(ParseError) as info:
        WilsonCowanConfig.load(broken)
    assert info.value.line is not None

    incomplete = tmp_path / "incomplete.json"
    incomplete.write_text(json.dumps({"populations": ["E"], "tau": [0.01]}))
    with pytest.raises(ParseError):
        WilsonCowanConfig.load(incomplete)


def test_wilson_cowan_config_validation():
    with pytest.raises(InvalidArgumentError):
        WilsonCowanConfig(populations=("E", "I"), tau=(0.01,), sigma=(0.0, 0.0),
                          weights=((0.0, 0.0), (0.0, 0.0)), external=(0.0, 0.0))
    with pytest.raises(InvalidArgumentError):
        _single_population(areas={"A": (3,)})


def test_factory():
    assert "wilson-cowan-v1v4" in preset_names()
    assert isinstance(create_simulator("lorenz-indep", steps=10), LorenzSimulator)
    assert len(create_simulator("logistic-hidden", length=50).simulate()) == 3
    with pytest.raises(UsageError):
        create_simulator("no-such-system")
    with pytest.raises(UsageError):
        create_simulator("wilson-cowan-v1v4")
    with pytest.raises(UsageError):
        create_simulator("logistic-uni", no_such_field=1)
