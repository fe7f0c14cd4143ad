"""
Simulation
Data-generating processes for the univariate and network log-ARCH models.

Innovations are standard normal, so E ln eps^2 = -(Euler-Mascheroni + ln 2)
exactly and omega = phi0 - E ln eps^2. Random numbers come from numpy's
Philox counter-based generator keyed by a 64-bit seed.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.signal import lfilter, lfiltic

from network_logarch.core.errors import InvalidParameter, Nonstationary
from network_logarch.core.types import EdgeWeightMatrix, ReturnPanel

logger = logging.getLogger(__name__)

# Constants
LOG_CHI2_MEAN: float = -(np.euler_gamma + np.log(2.0))
MIN_BURN_IN: int = 500
START_DATE: str = '2000-01-03'


@dataclass(frozen=True)
class InnovationSpec:
    """Standard normal innovations drawn from Philox(seed)"""
    seed: int = 0
    distribution: str = 'standard_normal'

    def __post_init__(self):
        if self.distribution != 'standard_normal':
            raise InvalidParameter("Only standard normal innovations are supported")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidParameter(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.seed))


@dataclass(frozen=True)
class NetworkSimulation:
    """Simulated network panel with the latent pieces kept for checks"""
    panel: ReturnPanel
    log_vol: np.ndarray
    log_eps2: np.ndarray
    omega: np.ndarray


def _check_burn_in(burn_in: int, T: int) -> None:
    if burn_in < MIN_BURN_IN:
        raise InvalidParameter(f"burn_in must be at least {MIN_BURN_IN}, got {burn_in}")
    if T < 1:
        raise InvalidParameter(f"T must be positive, got {T}")


def synthetic_dates(T: int) -> list:
    """Business-day ISO labels used for simulated panels"""
    return [d.strftime('%Y-%m-%d') for d in pd.bdate_range(START_DATE, periods=T)]


def simulate_univariate(
    phi0: float,
    gamma: Sequence[float],
    T: int,
    burn_in: int = MIN_BURN_IN,
    spec: Optional[InnovationSpec] = None,
) -> np.ndarray:
    """
    Simulate a log-ARCH(P) return series

    ln h_t = omega + sum_p gamma_p ln Y^2_{t-p}, Y_t = sqrt(h_t) eps_t

    Returns:
        Length-T array of returns after discarding burn_in draws

    Raises:
        Nonstationary: If sum |gamma_p| >= 1
    """
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    _check_burn_in(burn_in, T)
    if np.abs(gamma).sum() >= 1:
        raise Nonstationary(f"sum |gamma| = {np.abs(gamma).sum():.4f} must be below 1")

    spec = spec or InnovationSpec()
    eps = spec.generator().standard_normal(T + burn_in)
    log_eps2 = np.log(eps ** 2)
    omega = phi0 - LOG_CHI2_MEAN

    # ln Y^2_t - sum gamma_p ln Y^2_{t-p} = omega + ln eps^2_t, started at the mean
    denominator = np.concatenate([[1.0], -gamma])
    mean = phi0 / (1.0 - gamma.sum())
    state = lfiltic([1.0], denominator, y=np.full(gamma.shape[0], mean))
    log_y2, _ = lfilter([1.0], denominator, omega + log_eps2, zi=state)

    log_h = log_y2 - log_eps2
    returns = np.exp(log_h / 2.0) * eps
    return returns[burn_in:]


def simulate_network_paths(
    phi0: Sequence[float],
    rho: float,
    gamma_diag: Sequence[float],
    w: EdgeWeightMatrix,
    T: int,
    burn_in: int = MIN_BURN_IN,
    spec: Optional[InnovationSpec] = None,
    tickers: Optional[Sequence[str]] = None,
) -> NetworkSimulation:
    """
    Simulate the network model through its reduced form

    Y*_t = (I - rho W)^-1 (omega + Gamma Y*_{t-1} + ln eps^2_t)

    Raises:
        Nonstationary: If |rho| >= 1 on row-normalized W, or the companion
            matrix (I - rho W)^-1 Gamma has spectral radius >= 1
    """
    phi0 = np.asarray(phi0, dtype=float)
    gamma = np.asarray(gamma_diag, dtype=float)
    n = w.n
    _check_burn_in(burn_in, T)
    if phi0.shape != (n,) or gamma.shape != (n,):
        raise InvalidParameter("phi0 and gamma_diag must have one entry per stock")
    if w.normalization == 'row_normalized' and not abs(rho) < 1:
        raise Nonstationary(f"|rho| = {abs(rho):.4f} must be below 1 for row-normalized W")

    system = np.eye(n) - rho * w.weights
    reduced = np.linalg.solve(system, np.eye(n))
    companion = reduced @ np.diag(gamma)
    radius = float(np.max(np.abs(np.linalg.eigvals(companion))))
    if radius >= 1:
        raise Nonstationary(f"Companion spectral radius {radius:.4f} must be below 1")

    spec = spec or InnovationSpec()
    eps = spec.generator().standard_normal((T + burn_in, n))
    log_eps2 = np.log(eps ** 2)
    omega = phi0 - LOG_CHI2_MEAN

    log_vol = np.empty((T + burn_in, n))
    previous = np.linalg.solve(system - np.diag(gamma), phi0)
    for t in range(T + burn_in):
        previous = reduced @ (omega + gamma * previous + log_eps2[t])
        log_vol[t] = previous

    log_h = log_vol - log_eps2
    returns = np.exp(log_h / 2.0) * eps
    keep = slice(burn_in, None)
    names = list(tickers) if tickers is not None else list(w.tickers) or [f"S{i + 1:02d}" for i in range(n)]
    panel = ReturnPanel(names, synthetic_dates(T), returns[keep].T)
    logger.debug("Simulated network panel n=%d T=%d radius=%.3f", n, T, radius)
    return NetworkSimulation(panel, log_vol[keep].T, log_eps2[keep].T, omega)


def simulate_network(
    phi0: Sequence[float],
    rho: float,
    gamma_diag: Sequence[float],
    w: EdgeWeightMatrix,
    T: int,
    burn_in: int = MIN_BURN_IN,
    spec: Optional[InnovationSpec] = None,
) -> ReturnPanel:
    """Simulate a network log-ARCH return panel"""
    return simulate_network_paths(phi0, rho, gamma_diag, w, T, burn_in, spec).panel
