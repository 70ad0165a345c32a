"""
Shared test signals with known properties.

Long reproduction checks are marked slow and only run with `-m slow`.
"""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from Core.simulators import create_simulator  # noqa: E402
from Core.timeseries import TimeSeries  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long full-size reproduction checks")


def pytest_collection_modifyitems(config, items):
    if "slow" in (config.getoption("markexpr") or ""):
        return
    skip_slow = pytest.mark.skip(reason="slow; run with -m slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def white_noise():
    """Unit-variance white noise at 100 Hz"""
    rng = np.random.default_rng(7)
    return TimeSeries(rng.standard_normal(16384), 100.0, name="noise")


@pytest.fixture
def sine_wave():
    """32 Hz sine sampled at 256 Hz: bin-centred for 256-sample segments"""
    t = np.arange(4096) / 256.0
    return TimeSeries(np.sin(2 * np.pi * 32.0 * t), 256.0, name="sine")


@pytest.fixture(scope="session")
def logistic_uni():
    """Unidirectionally coupled logistic maps, x drives y"""
    x, y = create_simulator("logistic-uni").simulate()
    return x, y


@pytest.fixture(scope="session")
def logistic_indep():
    x, y = create_simulator("logistic-indep").simulate()
    return x, y


@pytest.fixture(scope="session")
def short_uni(logistic_uni):
    x, y = logistic_uni
    return x.head(2000), y.head(2000)
