"""Seeded generators for the coupled benchmark systems.

Each system has a frozen config dataclass and a Simulator subclass; named
presets are resolved through create_simulator().
"""

import json
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from Utils.errors import InvalidArgumentError, ParseError, SimulationError, UsageError
from Utils.workers import parallel_map
from .timeseries import TimeSeries


def mirror_unit_interval(values: np.ndarray) -> np.ndarray:
    """Reflect values at 0 and 1 until they lie in [0, 1]

    Repeated reflection is periodic with period 2, so it reduces to a fold of |v| mod 2.
    """
    folded = np.mod(np.abs(values), 2.0)
    return np.where(folded > 1.0, 2.0 - folded, folded)


def transduction(x: np.ndarray) -> np.ndarray:
    """Theta(x) = x / (1 - exp(-x)) with Theta(0) = 1"""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-8
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out = x / -np.expm1(-x)
    # First-order expansion around the removable singularity
    return np.where(small, 1.0 + x / 2.0, out)


@dataclass(frozen=True)
class LogisticMapConfig:
    rates: Tuple[float, ...]
    coupling: Tuple[Tuple[float, ...], ...]
    length: int = 10000
    initial_state: Optional[Tuple[float, ...]] = None
    seed: int = 0
    burn_in: int = 0
    names: Tuple[str, ...] = ()

    def __post_init__(self):
        m = len(self.rates)
        matrix = np.asarray(self.coupling, dtype=float)
        if matrix.shape != (m, m):
            raise InvalidArgumentError(f"Coupling matrix shape {matrix.shape} does not match {m} rates")
        if not np.allclose(np.diag(matrix), 1.0):
            raise InvalidArgumentError("Coupling matrix needs A_ii = 1")
        if self.length < 1 or self.burn_in < 0:
            raise InvalidArgumentError("length must be positive and burn_in non-negative")
        if self.initial_state is not None:
            state = np.asarray(self.initial_state, dtype=float)
            if state.shape != (m,) or np.any(state <= 0) or np.any(state >= 1):
                raise InvalidArgumentError("initial_state needs one value in (0, 1) per map")

    def with_coupling(self, target: int, source: int, value: float) -> "LogisticMapConfig":
        matrix = [list(row) for row in self.coupling]
        matrix[target][source] = value
        return replace(self, coupling=tuple(tuple(row) for row in matrix))


@dataclass(frozen=True)
class LorenzConfig:
    sigma: Tuple[float, float] = (10.0, 10.209)
    rho: Tuple[float, float] = (27.0, 25.9)
    beta: Tuple[float, float] = (2.667, 2.652)
    kappa: Tuple[float, float] = (0.0, 0.1)
    steps: int = 5_000_000
    dt: float = 1e-3
    initial_state: Tuple[float, ...] = (1.0, 1.0, 1.0, -1.0, -1.0, 1.0)
    record_every: int = 1
    burn_in: int = 0

    def __post_init__(self):
        if not self.dt > 0 or self.steps < 1:
            raise InvalidArgumentError("Lorenz config needs dt > 0 and steps >= 1")
        if len(self.initial_state) != 6:
            raise InvalidArgumentError("Lorenz initial_state needs 6 values")
        if self.record_every < 1:
            raise InvalidArgumentError("record_every must be >= 1")

    @property
    def duration(self) -> float:
        return self.steps * self.dt


@dataclass(frozen=True)
class KuramotoConfig:
    base_frequencies: Tuple[float, ...] = (10.50422624, 59.0, 40.0)
    couplings: Tuple[float, ...] = (0.0, 3.0, 4.3)
    noise_std: float = 0.1
    dt: float = 5e-3
    steps: int = 20000
    seed: int = 0
    initial_phases: Optional[Tuple[float, ...]] = None
    attractive: bool = False
    names: Tuple[str, ...] = ("z", "x", "y")

    def __post_init__(self):
        if len(self.base_frequencies) != len(self.couplings):
            raise InvalidArgumentError("base_frequencies and couplings differ in length")
        if self.initial_phases is not None and len(self.initial_phases) != len(self.couplings):
            raise InvalidArgumentError("initial_phases needs one value per oscillator")
        if not self.dt > 0 or self.steps < 1 or self.noise_std < 0:
            raise InvalidArgumentError("Kuramoto config needs dt > 0, steps >= 1, noise_std >= 0")

    @property
    def oscillator_count(self) -> int:
        return len(self.couplings)


@dataclass(frozen=True)
class WilsonCowanConfig:
    """Populations of a two-area rate model

    weights[i][j] is the input population j sends to population i, so
    I_net = weights @ r. areas maps an area name to the populations whose
    mean rate forms that area's observed signal.
    """
    populations: Tuple[str, ...]
    tau: Tuple[float, ...]
    sigma: Tuple[float, ...]
    weights: Tuple[Tuple[float, ...], ...]
    external: Tuple[float, ...]
    areas: Dict[str, Tuple[int, ...]] = field(default_factory=dict)
    dt: float = 2e-4
    steps: int = 50000
    record_every: int = 1
    realizations: int = 10
    seed: int = 0
    initial_rates: Optional[Tuple[float, ...]] = None
    burn_in: int = 0

    def __post_init__(self):
        n = len(self.populations)
        for name in ("tau", "sigma", "external"):
            if len(getattr(self, name)) != n:
                raise InvalidArgumentError(f"{name} needs {n} values, one per population")
        if np.asarray(self.weights, dtype=float).shape != (n, n):
            raise InvalidArgumentError(f"weights must be a {n}x{n} matrix")
        if any(t <= 0 for t in self.tau) or not self.dt > 0:
            raise InvalidArgumentError("Time constants and dt must be positive")
        if self.initial_rates is not None and len(self.initial_rates) != n:
            raise InvalidArgumentError(f"initial_rates needs {n} values")
        for area, members in self.areas.items():
            if not members or any(not 0 <= i < n for i in members):
                raise InvalidArgumentError(f"Area {area} references unknown populations {members}")

    @classmethod
    def from_dict(cls, data: dict) -> "WilsonCowanConfig":
        try:
            return cls(
                populations=tuple(data["populations"]),
                tau=tuple(float(v) for v in data["tau"]),
                sigma=tuple(float(v) for v in data["sigma"]),
                weights=tuple(tuple(float(v) for v in row) for row in data["weights"]),
                external=tuple(float(v) for v in data["external"]),
                areas={k: tuple(int(i) for i in v) for k, v in data.get("areas", {}).items()},
                dt=float(data.get("dt", 2e-4)),
                steps=int(data.get("steps", 50000)),
                record_every=int(data.get("record_every", 1)),
                realizations=int(data.get("realizations", 10)),
                seed=int(data.get("seed", 0)),
                initial_rates=tuple(data["initial_rates"]) if data.get("initial_rates") else None,
                burn_in=int(data.get("burn_in", 0)),
            )
        except (KeyError, TypeError) as e:
            raise ParseError(f"Wilson-Cowan config is missing or has a malformed field: {e}") from e

    @classmethod
    def load(cls, path: Path) -> "WilsonCowanConfig":
        path = Path(path)
        if not path.exists():
            raise UsageError(f"Wilson-Cowan weight file not found: {path}")
        try:
            with open(path, 'r') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, line=e.lineno, path=str(path)) from e
        return cls.from_dict(data)


class Simulator(ABC):
    """Abstract base class for benchmark systems"""

    @abstractmethod
    def simulate(self) -> List[TimeSeries]:
        """Run one realization and return one series per observed variable"""
        pass

    @property
    @abstractmethod
    def sample_rate(self) -> float:
        pass


class LogisticMapSimulator(Simulator):
    def __init__(self, config: LogisticMapConfig):
        self.config = config

    @property
    def sample_rate(self) -> float:
        return 1.0

    def simulate(self) -> List[TimeSeries]:
        cfg = self.config
        rates = np.asarray(cfg.rates, dtype=float)
        coupling = np.asarray(cfg.coupling, dtype=float)
        m = rates.size
        if cfg.initial_state is None:
            state = np.random.default_rng(cfg.seed).uniform(0.1, 0.9, size=m)
        else:
            state = np.asarray(cfg.initial_state, dtype=float)

        total = cfg.burn_in + cfg.length
        trajectory = np.empty((total, m))
        trajectory[0] = state
        for t in range(1, total):
            raw = rates * state * (1.0 - coupling @ state)
            if not np.all(np.isfinite(raw)):
                raise SimulationError("Logistic map state diverged", step=t)
            state = mirror_unit_interval(raw)
            trajectory[t] = state

        trajectory = trajectory[cfg.burn_in:]
        names = cfg.names or tuple(f"x{i + 1}" for i in range(m))
        logging.info(f"Simulated {m} coupled logistic maps for {cfg.length} steps")
        return [TimeSeries(trajectory[:, i], self.sample_rate, 0.0, names[i]) for i in range(m)]


class LorenzSimulator(Simulator):
    NAMES = ("x1", "y1", "z1", "x2", "y2", "z2")

    def __init__(self, config: LorenzConfig):
        self.config = config

    @property
    def sample_rate(self) -> float:
        return 1.0 / (self.config.dt * self.config.record_every)

    def derivative(self, state: Sequence[float]) -> Tuple[float, ...]:
        cfg = self.config
        s1, s2 = cfg.sigma
        r1, r2 = cfg.rho
        b1, b2 = cfg.beta
        k1, k2 = cfg.kappa
        x1, y1, z1, x2, y2, z2 = state
        return (
            s1 * ((y1 - x1) + k1 * (y2 - x1)),
            x1 * (r1 - z1) - y1,
            x1 * y1 - b1 * z1,
            s2 * ((y2 - x2) + k2 * (y1 - x2)),
            x2 * (r2 - z2) - y2,
            x2 * y2 - b2 * z2,
        )

    def step(self, state: Tuple[float, ...], dt: float) -> Tuple[float, ...]:
        """One classical RK4 step"""
        f = self.derivative
        k1 = f(state)
        k2 = f(tuple(s + 0.5 * dt * d for s, d in zip(state, k1)))
        k3 = f(tuple(s + 0.5 * dt * d for s, d in zip(state, k2)))
        k4 = f(tuple(s + dt * d for s, d in zip(state, k3)))
        return tuple(s + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
                     for s, a, b, c, d in zip(state, k1, k2, k3, k4))

    def simulate(self) -> List[TimeSeries]:
        cfg = self.config
        state = tuple(float(v) for v in cfg.initial_state)
        for t in range(cfg.burn_in):
            state = self.step(state, cfg.dt)

        records = cfg.steps // cfg.record_every + 1
        trajectory = np.empty((records, 6))
        trajectory[0] = state
        row = 1
        for t in range(1, cfg.steps + 1):
            state = self.step(state, cfg.dt)
            if t % cfg.record_every == 0:
                if not all(math.isfinite(v) for v in state):
                    raise SimulationError("Lorenz state became non-finite", step=t)
                trajectory[row] = state
                row += 1

        if not np.all(np.isfinite(trajectory)):
            raise SimulationError("Lorenz state became non-finite")
        logging.info(f"Integrated coupled Lorenz systems for {cfg.duration:g} time units "
                     f"(kappa={cfg.kappa}, {records} recorded samples)")
        return [TimeSeries(trajectory[:, i], self.sample_rate, 0.0, name)
                for i, name in enumerate(self.NAMES)]


class KuramotoSimulator(Simulator):
    def __init__(self, config: KuramotoConfig):
        self.config = config

    @property
    def sample_rate(self) -> float:
        return 1.0 / self.config.dt

    def phases(self) -> np.ndarray:
        """Euler-Maruyama phase trajectory, shape (steps, m)"""
        cfg = self.config
        m = cfg.oscillator_count
        rng = np.random.default_rng(cfg.seed)
        omega = 2.0 * np.pi * np.asarray(cfg.base_frequencies, dtype=float)
        gain = np.asarray(cfg.couplings, dtype=float) / m
        sign = -1.0 if cfg.attractive else 1.0
        theta = np.zeros(m) if cfg.initial_phases is None else np.asarray(cfg.initial_phases, dtype=float)
        noise = rng.standard_normal((cfg.steps, m)) * (cfg.noise_std * np.sqrt(cfg.dt))

        trajectory = np.empty((cfg.steps, m))
        trajectory[0] = theta
        for t in range(1, cfg.steps):
            # Verbatim form sums sin(theta_i - theta_j); attractive flips it to sin(theta_j - theta_i)
            drift = omega + gain * np.sin(sign * (theta[:, None] - theta[None, :])).sum(axis=1)
            theta = theta + drift * cfg.dt + noise[t]
            trajectory[t] = theta
        return trajectory

    def simulate(self) -> List[TimeSeries]:
        cfg = self.config
        trajectory = np.sin(self.phases())
        names = cfg.names if len(cfg.names) == cfg.oscillator_count else tuple(
            f"osc{i + 1}" for i in range(cfg.oscillator_count))
        logging.info(f"Simulated {cfg.oscillator_count} Kuramoto oscillators for {cfg.steps} steps")
        return [TimeSeries(trajectory[:, i], self.sample_rate, 0.0, names[i])
                for i in range(cfg.oscillator_count)]


class WilsonCowanSimulator(Simulator):
    def __init__(self, config: WilsonCowanConfig):
        self.config = config

    @property
    def sample_rate(self) -> float:
        return 1.0 / (self.config.dt * self.config.record_every)

    def simulate(self, seed: Optional[int] = None) -> List[TimeSeries]:
        """Euler-Maruyama integration of tau dr = (-r + Theta(W r + I_ext)) dt + sqrt(tau) sigma dW"""
        cfg = self.config
        rng = np.random.default_rng(cfg.seed if seed is None else seed)
        tau = np.asarray(cfg.tau, dtype=float)
        sigma = np.asarray(cfg.sigma, dtype=float)
        weights = np.asarray(cfg.weights, dtype=float)
        external = np.asarray(cfg.external, dtype=float)
        n = tau.size

        rates = (transduction(external) if cfg.initial_rates is None
                 else np.asarray(cfg.initial_rates, dtype=float))
        drift_scale = cfg.dt / tau
        noise_scale = sigma * np.sqrt(cfg.dt / tau)

        total = cfg.burn_in + cfg.steps
        records = cfg.steps // cfg.record_every
        trajectory = np.empty((records, n))
        row = 0
        for t in range(total):
            drive = transduction(weights @ rates + external)
            rates = rates + drift_scale * (drive - rates) + noise_scale * rng.standard_normal(n)
            if not np.all(np.isfinite(rates)):
                raise SimulationError("Wilson-Cowan rates became non-finite", step=t)
            k = t - cfg.burn_in + 1
            if k > 0 and k % cfg.record_every == 0 and row < records:
                trajectory[row] = rates
                row += 1

        return [TimeSeries(trajectory[:, i], self.sample_rate, 0.0, name)
                for i, name in enumerate(cfg.populations)]

    def area_signals(self, populations: Sequence[TimeSeries]) -> List[TimeSeries]:
        """Mean rate of each configured area, in config order"""
        signals = []
        for area, members in self.config.areas.items():
            stacked = np.mean([populations[i].samples for i in members], axis=0)
            signals.append(TimeSeries(stacked, self.sample_rate, 0.0, area))
        return signals

    def simulate_realizations(self, workers: Optional[int] = None) -> List[List[TimeSeries]]:
        """Independent realizations seeded from one SeedSequence, returned in seed order"""
        children = np.random.SeedSequence(self.config.seed).spawn(self.config.realizations)
        seeds = [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]
        logging.info(f"Simulating {len(seeds)} Wilson-Cowan realizations")
        return parallel_map(self.simulate, seeds, workers=workers, desc="realizations")


def _logistic(rates: Sequence[float], coupling: Sequence[Sequence[float]], length: int = 10000,
              initial_state: Sequence[float] = (0.4, 0.2), names: Sequence[str] = ("x", "y")) -> LogisticMapConfig:
    return LogisticMapConfig(tuple(rates), tuple(tuple(r) for r in coupling), length,
                             tuple(initial_state), 0, 0, tuple(names))


PRESETS: Dict[str, object] = {
    "logistic-uni": _logistic((3.9902032398544094, 3.9900842430866197), ((1, 0), (0.05, 1))),
    "logistic-circ": _logistic((3.9903787118484475, 3.9900528401775186), ((1, 0.05), (0.05, 1))),
    "logistic-hidden": _logistic((3.9903839016316964, 3.9904120926448896, 3.9904110403001893),
                                 ((1, 0, 0.05), (0, 1, 0.05), (0, 0, 1)),
                                 initial_state=(0.4, 0.2, 0.3), names=("x", "y", "z")),
    "logistic-indep": _logistic((3.9903770705735107, 3.9907504255884914), ((1, 0), (0, 1))),
    "logistic-length": _logistic((3.99097965, 3.99024767), ((1, 0), (0.05, 1)), length=5000),
    "logistic-coupling": _logistic((3.99, 3.99), ((1, 0), (0.05, 1)), length=2000),
    "logistic-noise": _logistic((3.99097965, 3.99024767), ((1, 0), (0.15, 1)), length=2000),
    "lorenz-uni": LorenzConfig(kappa=(0.0, 0.1)),
    "lorenz-circ": LorenzConfig(kappa=(0.1, 0.1)),
    "lorenz-indep": LorenzConfig(kappa=(0.0, 0.0)),
    "kuramoto-3": KuramotoConfig(),
}

WILSON_COWAN_PRESET = "wilson-cowan-v1v4"


def preset_names() -> List[str]:
    return sorted(PRESETS) + [WILSON_COWAN_PRESET]


def create_simulator_from_config(config) -> Simulator:
    if isinstance(config, LogisticMapConfig):
        return LogisticMapSimulator(config)
    if isinstance(config, LorenzConfig):
        return LorenzSimulator(config)
    if isinstance(config, KuramotoConfig):
        return KuramotoSimulator(config)
    if isinstance(config, WilsonCowanConfig):
        return WilsonCowanSimulator(config)
    raise InvalidArgumentError(f"Unsupported simulator config: {type(config).__name__}")


def create_simulator(preset: str, config_path: Optional[Path] = None, **overrides) -> Simulator:
    """Factory function to create the simulator behind a preset name

    overrides replace config fields (e.g. length=2000, seed=3).
    """
    if preset == WILSON_COWAN_PRESET:
        if config_path is None:
            raise UsageError(f"Preset {preset} needs a user-supplied weight file (--weights)")
        config = WilsonCowanConfig.load(config_path)
    elif preset in PRESETS:
        config = PRESETS[preset]
    else:
        raise UsageError(f"Unknown preset: {preset}. Available: {', '.join(preset_names())}")

    if overrides:
        try:
            config = replace(config, **overrides)
        except TypeError as e:
            raise UsageError(f"Invalid override for preset {preset}: {e}") from e
    return create_simulator_from_config(config)
