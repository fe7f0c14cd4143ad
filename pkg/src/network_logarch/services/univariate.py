"""
Univariate log-ARCH Service
Per-stock log-ARCH(P) estimation through the ARMA representation of ln Y^2
and one-step-ahead forecasting with the smearing correction.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from network_logarch.core.errors import (
    InsufficientObservations,
    InvalidParameter,
    Overflow,
    SingularDesign,
)
from network_logarch.core.types import LogVolPanel, UnivariateFit

logger = logging.getLogger(__name__)

CRITERIA = ('aic', 'bic')


def _lag_design(series: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Dependent vector and [1, lag 1, ..., lag P] design over t = P..T-1"""
    T = series.shape[0]
    lags = [series[order - p:T - p] for p in range(1, order + 1)]
    X = np.column_stack([np.ones(T - order)] + lags)
    return series[order:], X


def estimate_mu_star(residuals: Sequence[float]) -> float:
    """
    Smearing estimate of E ln eps^2: -ln((1/T) sum exp(u_t))

    Evaluated as a log-sum-exp so large residuals cannot overflow.

    Raises:
        InsufficientObservations: If residuals is empty
        Overflow: If the result is not finite
    """
    u = np.asarray(residuals, dtype=float)
    if u.size == 0:
        raise InsufficientObservations("Smearing estimate needs at least one residual")
    value = -(logsumexp(u) - np.log(u.size))
    if not np.isfinite(value):
        raise Overflow("Smearing correction is not finite")
    return float(value)


def fit_logarch(series: Sequence[float], order: int = 1) -> UnivariateFit:
    """
    Fit log-ARCH(P) by OLS on ln Y^2_t = phi0 + sum phi_p ln Y^2_{t-p} + u_t

    Args:
        series: ln Y^2 values in chronological order
        order: number of ARCH lags P

    Returns:
        UnivariateFit with gamma_p = phi_p and omega = phi0 - mu_star

    Raises:
        SingularDesign: If the lag design is rank deficient
    """
    x = np.asarray(series, dtype=float)
    if order < 1:
        raise InvalidParameter(f"ARCH order must be positive, got {order}")
    if x.ndim != 1 or x.shape[0] <= order + 2:
        raise InsufficientObservations(f"log-ARCH({order}) needs more than {order + 2} observations")
    if not np.all(np.isfinite(x)):
        raise InvalidParameter("ln Y^2 series must be finite")

    y, X = _lag_design(x, order)
    if np.linalg.matrix_rank(X) < order + 1:
        raise SingularDesign(f"Lag design of log-ARCH({order}) is rank deficient")

    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    residuals = y - X @ coef
    nobs = y.shape[0]
    rss = float(residuals @ residuals)
    dof = max(nobs - order - 1, 1)
    sigma2 = rss / dof
    std_errors = np.sqrt(np.diag(sigma2 * np.linalg.pinv(X.T @ X)))
    log_lik_term = nobs * np.log(max(rss, np.finfo(float).tiny) / nobs)

    return UnivariateFit(
        phi0=float(coef[0]),
        gamma=coef[1:],
        mu_star=estimate_mu_star(residuals),
        residuals=residuals,
        std_errors=std_errors,
        sigma2=sigma2,
        aic=float(log_lik_term + 2 * (order + 1)),
        bic=float(log_lik_term + np.log(nobs) * (order + 1)),
    )


def forecast_one_step(fit: UnivariateFit, last_obs: Sequence[float]) -> float:
    """
    One-step-ahead ln h forecast

    ln h_{T+1} = [phi0 + ln((1/T) sum exp(u_t))] + sum_p phi_p ln y^2_{T+1-p}

    Args:
        fit: Fitted model
        last_obs: ln y^2 values in chronological order; the last P are used
    """
    obs = np.asarray(last_obs, dtype=float)
    if obs.shape[0] < fit.order:
        raise InsufficientObservations(f"Need {fit.order} lagged values, got {obs.shape[0]}")
    lags = obs[::-1][:fit.order]
    return float(fit.omega + fit.gamma @ lags)


def select_ar_order(series: Sequence[float], max_order: int = 5, criterion: str = 'bic') -> Tuple[int, UnivariateFit]:
    """
    Choose the AR order of ln Y^2 by information criterion

    Every candidate is fitted on the same effective sample (the first
    max_order observations serve only as lags), so the criteria compare.
    Ties go to the smaller order.
    """
    if criterion not in CRITERIA:
        raise InvalidParameter(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    x = np.asarray(series, dtype=float)
    best: Optional[Tuple[int, UnivariateFit]] = None
    best_score = np.inf
    for order in range(1, max_order + 1):
        fit = fit_logarch(x[max_order - order:], order)
        score = getattr(fit, criterion)
        if score < best_score:
            best, best_score = (order, fit), score
    return best


def fit_panel(volpanel: LogVolPanel, order: int = 1) -> List[UnivariateFit]:
    """Fit one univariate model per stock"""
    return [fit_logarch(row, order) for row in volpanel.values]


def forecast_panel(fits: Sequence[UnivariateFit], volpanel: LogVolPanel) -> np.ndarray:
    """One-step forecasts for every stock from its own fit"""
    return np.array([forecast_one_step(fit, row) for fit, row in zip(fits, volpanel.values)])
