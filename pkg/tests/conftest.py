"""
Pytest configuration and shared fixtures
"""

import numpy as np
import pytest

from network_logarch.core.config import Config, reset_config
from network_logarch.core.types import DistanceMatrix, ForecastTable, ReturnPanel
from network_logarch.services.network_builder import weights_knn
from network_logarch.utils.data_loader import log_squared
from network_logarch.utils.simulate import InnovationSpec, simulate_network, simulate_univariate, synthetic_dates

TICKERS = ['AAA', 'BBB', 'CCC', 'DDD', 'EEE', 'FFF']


@pytest.fixture(autouse=True)
def isolated_config(monkeypatch):
    """Keep NETARCH_* variables from the shell out of the tests"""
    import os

    for name in list(os.environ):
        if name.startswith('NETARCH_'):
            monkeypatch.delenv(name, raising=False)
    reset_config()
    yield
    reset_config()


@pytest.fixture
def test_config():
    """Small configuration for fast pipelines"""
    return Config(window_len=200, bootstrap_reps=200, ensemble_burn_in=20, show_progress=False)


@pytest.fixture
def ring_distance():
    """Six stocks on a line: d_ij = |i - j|"""
    positions = np.arange(len(TICKERS), dtype=float)
    return DistanceMatrix(np.abs(positions[:, None] - positions[None, :]), 'euclidean', TICKERS)


@pytest.fixture
def knn_weights(ring_distance):
    return weights_knn(ring_distance, 2)


@pytest.fixture
def network_panel(knn_weights):
    """Simulated network panel: n=6, T=400, rho=0.3, gamma=0.2"""
    return simulate_network(
        np.full(6, -6.0), 0.3, np.full(6, 0.2), knn_weights, 400, spec=InnovationSpec(seed=7)
    )


@pytest.fixture
def network_volpanel(network_panel):
    return log_squared(network_panel)


@pytest.fixture
def univariate_series():
    """Returns of a log-ARCH(1) with phi0=-5, gamma=0.4"""
    return simulate_univariate(-5.0, [0.4], 2000, spec=InnovationSpec(seed=11))


@pytest.fixture
def small_panel():
    """Hand-written 3 x 5 return panel"""
    returns = [
        [0.01, -0.02, 0.015, 0.0, 0.005],
        [0.02, 0.01, -0.01, 0.03, -0.02],
        [-0.01, 0.005, 0.02, -0.015, 0.01],
    ]
    return ReturnPanel(['X', 'Y', 'Z'], synthetic_dates(5), returns)


@pytest.fixture
def forecast_table():
    """
    Three models on two stocks over 80 dates

    'good' misses by small noise, 'bad' by large noise plus a bias, and
    'logarch' sits in between.
    """
    rng = np.random.Generator(np.random.Philox(3))
    realized = rng.normal(-9.0, 2.0, size=(2, 80))
    forecasts = np.stack([
        realized + rng.normal(0.0, 1.0, size=(2, 80)),
        realized + rng.normal(0.0, 0.3, size=(2, 80)),
        realized + 1.5 + rng.normal(0.0, 2.0, size=(2, 80)),
    ])
    return ForecastTable(
        ['logarch', 'good', 'bad'], ['AAA', 'BBB'], synthetic_dates(80), forecasts, realized,
        {'window_len': 100},
    )
