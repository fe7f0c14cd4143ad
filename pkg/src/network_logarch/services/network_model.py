"""
Network log-ARCH Service
Estimation of Y*_t = phi0 + rho W Y*_t + Gamma Y*_{t-1} + u_t by two-step GMM
on forward orthogonal deviations, and joint one-step forecasting.

The stock fixed effects phi0 are removed by the Helmert transform over time.
W Y*_t is endogenous and is instrumented by network lags W^k Y*_{t-1},
k = 1..instrument_depth; each own lag Y*_{t-1}(s_i) instruments itself.
All cross products are accumulated per stock, so the stacked n(T-2) design
is never materialized.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from network_logarch.core.errors import (
    InsufficientObservations,
    InvalidParameter,
    SingularMoment,
    SingularSystem,
    UnstableRho,
)
from network_logarch.core.serialization import content_hash
from network_logarch.core.types import EdgeWeightMatrix, LogVolPanel, NetworkFit
from network_logarch.services.univariate import estimate_mu_star

logger = logging.getLogger(__name__)

# Constants
MAX_CONDITION: float = 1e12
PROVENANCE: str = 'two-step GMM, forward orthogonal deviations'


def helmert_transform(rows: np.ndarray) -> np.ndarray:
    """
    Forward orthogonal deviations along time

    z_t = c_t (x_t - mean(x_{t+1..T})), c_t = sqrt((T-t)/(T-t+1)), t = 1..T-1.
    Annihilates per-row constants and preserves inner products of demeaned rows.

    Args:
        rows: n x T matrix (or a single length-T series)

    Returns:
        n x (T-1) matrix (or a length T-1 series)
    """
    x = np.asarray(rows, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    T = x.shape[1]
    if T < 2:
        raise InsufficientObservations("Helmert transform needs at least 2 time points")
    suffix = np.cumsum(x[:, ::-1], axis=1)[:, ::-1]
    remaining = np.arange(T - 1, 0, -1, dtype=float)
    future_mean = suffix[:, 1:] / remaining
    scale = np.sqrt(remaining / (remaining + 1.0))
    z = scale * (x[:, :-1] - future_mean)
    return z[0] if single else z


def _stability_limit(w: EdgeWeightMatrix) -> float:
    """Largest |rho| keeping I - rho W invertible"""
    if w.normalization == 'row_normalized':
        return 1.0
    radius = w.spectral_radius()
    return np.inf if radius == 0 else 1.0 / radius


class NetworkGMM:
    """Two-step GMM estimator for the network log-ARCH(1) model"""

    def __init__(
        self,
        volpanel: LogVolPanel,
        w: EdgeWeightMatrix,
        instrument_depth: int = 2,
        rho_fixed: Optional[float] = None,
    ):
        """
        Prepare the transformed panel and instruments

        Args:
            volpanel: ln Y^2 panel (n x T)
            w: edge weight matrix matching the panel's stocks
            instrument_depth: highest power of W applied to the lagged panel
            rho_fixed: hold rho at this value and estimate Gamma only
        """
        if w.n != volpanel.n:
            raise InvalidParameter(f"W is {w.n} x {w.n} but the panel has {volpanel.n} stocks")
        if volpanel.T < 4:
            raise InsufficientObservations("Network log-ARCH needs at least 4 time points")
        if instrument_depth < 1 and rho_fixed is None:
            raise InvalidParameter("instrument_depth must be at least 1")

        self.volpanel = volpanel
        self.w = w
        self.instrument_depth = instrument_depth
        self.rho_fixed = rho_fixed

        W = w.weights
        Y = volpanel.values
        self._y_raw = Y[:, 1:]
        self._lag_raw = Y[:, :-1]
        self._wy_raw = W @ self._y_raw
        self._y = helmert_transform(self._y_raw)
        self._lag = helmert_transform(self._lag_raw)
        self._wy = W @ self._y

        self._pooled: List[np.ndarray] = []
        if rho_fixed is None:
            z = self._lag
            for _ in range(instrument_depth):
                z = W @ z
                self._pooled.append(z)

        self.nobs = self._y.size
        self.moment_weight: Optional[np.ndarray] = None

    # Cross products with the instrument vector h = (own lags, pooled network lags)

    def _gram(self, weight: np.ndarray) -> np.ndarray:
        """sum over (i, t) of weight * h h'"""
        n, d = self._lag.shape[0], len(self._pooled)
        gram = np.zeros((n + d, n + d))
        lag_w = self._lag * weight
        gram[:n, :n] = np.diag((lag_w * self._lag).sum(axis=1))
        for k, zk in enumerate(self._pooled):
            cross = (lag_w * zk).sum(axis=1)
            gram[:n, n + k] = cross
            gram[n + k, :n] = cross
            for l in range(k, d):
                value = float((zk * weight * self._pooled[l]).sum())
                gram[n + k, n + l] = gram[n + l, n + k] = value
        return gram

    def _h_dot(self, field: np.ndarray) -> np.ndarray:
        """sum over (i, t) of h * field"""
        own = (self._lag * field).sum(axis=1)
        pooled = [float((zk * field).sum()) for zk in self._pooled]
        return np.concatenate([own, pooled])

    def _moment_jacobian(self, instrument_gram: np.ndarray) -> np.ndarray:
        """H'X with regressors (W Y*_t, own lags); rho column dropped when fixed"""
        n = self._lag.shape[0]
        own_block = instrument_gram[:, :n]
        if self.rho_fixed is not None:
            return own_block
        return np.column_stack([self._h_dot(self._wy), own_block])

    def _dependent(self) -> np.ndarray:
        if self.rho_fixed is None:
            return self._y
        return self._y - self.rho_fixed * self._wy

    def _split(self, theta: np.ndarray):
        if self.rho_fixed is None:
            return float(theta[0]), theta[1:]
        return float(self.rho_fixed), theta

    def _residuals(self, rho: float, gamma: np.ndarray) -> np.ndarray:
        return self._y - rho * self._wy - gamma[:, None] * self._lag

    @staticmethod
    def _check_conditioning(matrix: np.ndarray, what: str) -> None:
        scale = np.sqrt(np.abs(np.diag(matrix)))
        if np.any(scale == 0) or not np.all(np.isfinite(matrix)):
            raise SingularMoment(f"{what} has a degenerate column")
        if np.linalg.cond(matrix / np.outer(scale, scale)) > MAX_CONDITION:
            raise SingularMoment(f"{what} is numerically singular")

    def _solve(self, G: np.ndarray, weight: np.ndarray, h_y: np.ndarray) -> np.ndarray:
        normal = G.T @ weight @ G
        self._check_conditioning(normal, "GMM normal matrix")
        return np.linalg.solve(normal, G.T @ weight @ h_y)

    def objective(self, rho: float, gamma: Sequence[float]) -> float:
        """Second-step GMM criterion m(theta)' S^-1 m(theta), m = sum h u*"""
        if self.moment_weight is None:
            raise InvalidParameter("objective is available after fit()")
        moments = self._h_dot(self._residuals(rho, np.asarray(gamma, dtype=float)))
        return float(moments @ self.moment_weight @ moments)

    def fit(self) -> NetworkFit:
        """
        Run both GMM steps and recover the constants

        Raises:
            SingularMoment: If instruments are collinear
            UnstableRho: If rho leaves the stability region of W
        """
        instrument_gram = self._gram(np.ones_like(self._lag))
        self._check_conditioning(instrument_gram, "Instrument cross-product matrix")
        G = self._moment_jacobian(instrument_gram)
        h_y = self._h_dot(self._dependent())

        first_weight = np.linalg.inv(instrument_gram)
        theta = self._solve(G, first_weight, h_y)
        rho, gamma = self._split(theta)

        residuals = self._residuals(rho, gamma)
        moment_cov = self._gram(residuals ** 2)
        self._check_conditioning(moment_cov, "Moment covariance")
        self.moment_weight = np.linalg.inv(moment_cov)
        theta = self._solve(G, self.moment_weight, h_y)
        rho, gamma = self._split(theta)

        limit = _stability_limit(self.w)
        if not abs(rho) < limit:
            raise UnstableRho(f"Estimated rho = {rho:.4f} leaves the stability region |rho| < {limit:.4f}")

        covariance = np.linalg.inv(G.T @ self.moment_weight @ G)
        std_errors = np.sqrt(np.clip(np.diag(covariance), 0, None))
        moments = self._h_dot(self._residuals(rho, gamma))
        j_stat = float(moments @ self.moment_weight @ moments)

        raw = self._y_raw - rho * self._wy_raw - gamma[:, None] * self._lag_raw
        phi0 = raw.mean(axis=1)
        residual_panel = raw - phi0[:, None]
        mu_star = np.array([estimate_mu_star(row) for row in residual_panel])

        logger.debug("Network fit: rho=%.4f, J=%.3f, nobs=%d", rho, j_stat, self.nobs)
        return NetworkFit(
            rho=rho,
            gamma_diag=gamma,
            phi0=phi0,
            mu_star=mu_star,
            residual_panel=residual_panel,
            w_ref=content_hash(self.w),
            normalization=self.w.normalization,
            instrument_depth=0 if self.rho_fixed is not None else self.instrument_depth,
            rho_fixed=self.rho_fixed is not None,
            rho_se=float('nan') if self.rho_fixed is not None else float(std_errors[0]),
            gamma_se=std_errors[-len(gamma):],
            j_stat=j_stat,
            provenance=PROVENANCE,
        )


def fit_network_logarch(
    volpanel: LogVolPanel,
    w: EdgeWeightMatrix,
    instrument_depth: int = 2,
    rho_fixed: Optional[float] = None,
) -> NetworkFit:
    """Estimate (rho, gamma_1..gamma_n) by two-step GMM and recover phi0"""
    return NetworkGMM(volpanel, w, instrument_depth, rho_fixed).fit()


def forecast_network_one_step(fit: NetworkFit, w: EdgeWeightMatrix, last_obs: Sequence[float]) -> np.ndarray:
    """
    Joint one-step forecast h*_{T+1} = (I - rho W)^-1 (Gamma y*_T + phi0 - mu_star)

    Solved as a linear system.

    Raises:
        UnstableRho: If rho is outside the stability region of W
        SingularSystem: If I - rho W is numerically singular
    """
    obs = np.asarray(last_obs, dtype=float)
    if w.n != fit.n or obs.shape != (fit.n,):
        raise InvalidParameter("fit, W and last observations disagree on the number of stocks")
    if not abs(fit.rho) < _stability_limit(w):
        raise UnstableRho(f"rho = {fit.rho:.4f} leaves the stability region of W")
    system = np.eye(fit.n) - fit.rho * w.weights
    rhs = fit.gamma_diag * obs + fit.forecast_constant
    if np.linalg.cond(system) > MAX_CONDITION:
        raise SingularSystem("I - rho W is numerically singular")
    try:
        return np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystem(f"Cannot solve I - rho W: {e}")
