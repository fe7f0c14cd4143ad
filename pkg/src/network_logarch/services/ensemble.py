"""
Ensemble Service
Forecast combination across models: simple average, minimum variance and
constrained OLS (weights summing to one).
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, null_space, solve

from network_logarch.core.errors import (
    InsufficientObservations,
    InvalidParameter,
    RankDeficient,
    SingularCovariance,
)
from network_logarch.core.types import ForecastTable
from network_logarch.services.evaluation import mafe_from_errors, rmsfe_from_errors

logger = logging.getLogger(__name__)

# Constants
METHODS: Tuple[str, ...] = ('simple', 'minvar', 'cols')
WEIGHT_SUM_TOLERANCE: float = 1e-10
DEFAULT_RIDGE: float = 1e-8


@dataclass(frozen=True)
class EnsembleWeights:
    method: str
    weights: Mapping[str, float]
    window_used: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidParameter(f"method must be one of {METHODS}, got {self.method!r}")
        object.__setattr__(self, 'weights', {k: float(v) for k, v in self.weights.items()})
        values = np.fromiter(self.weights.values(), dtype=float)
        if abs(values.sum() - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise InvalidParameter(f"Combination weights sum to {values.sum()!r}, not 1")
        if self.method == 'simple' and not np.allclose(values, 1.0 / len(values), rtol=0, atol=1e-15):
            raise InvalidParameter("Simple average weights must all be equal")

    def vector(self, model_ids: Sequence[str]) -> np.ndarray:
        return np.array([self.weights[m] for m in model_ids])

    def to_dict(self) -> Dict[str, Any]:
        return {'method': self.method, 'weights': dict(self.weights), 'window_used': self.window_used}


def _model_ids(model_ids: Optional[Sequence[str]], m: int) -> Tuple[str, ...]:
    ids = tuple(model_ids) if model_ids is not None else tuple(f"m{i}" for i in range(m))
    if len(ids) != m:
        raise InvalidParameter(f"{len(ids)} model ids for {m} models")
    return ids


def _check_forecasts(forecasts: Any) -> np.ndarray:
    forecasts = np.asarray(forecasts, dtype=float)
    if forecasts.ndim < 1 or forecasts.shape[0] < 2:
        raise InvalidParameter("Combination needs at least two models")
    return forecasts


def combine_simple(forecasts: Any) -> np.ndarray:
    """Pointwise mean over the leading (model) axis"""
    return _check_forecasts(forecasts).mean(axis=0)


def minvar_weights(cov: np.ndarray, ridge: float = DEFAULT_RIDGE) -> np.ndarray:
    """
    w = S^-1 1 / (1' S^-1 1) with S the covariance plus ridge * trace / m on the diagonal

    Raises:
        SingularCovariance: If the regularized covariance cannot be inverted
    """
    cov = np.asarray(cov, dtype=float)
    m = cov.shape[0]
    regularized = cov + ridge * np.trace(cov) / m * np.eye(m)
    try:
        x = solve(regularized, np.ones(m), assume_a='sym')
    except (LinAlgError, ValueError) as e:
        raise SingularCovariance(f"Forecast error covariance is singular: {e}")
    total = x.sum()
    if not np.all(np.isfinite(x)) or total == 0:
        raise SingularCovariance("Forecast error covariance is singular")
    return x / total


def combine_minvar(
    past_errors: Any,
    forecasts: Any,
    model_ids: Optional[Sequence[str]] = None,
    ridge: float = DEFAULT_RIDGE,
) -> Tuple[np.ndarray, EnsembleWeights]:
    """
    Minimum-variance combination

    Args:
        past_errors: Array (samples, models) of past forecast errors
        forecasts: Array (models, ...) to combine

    Raises:
        InsufficientObservations: If there are fewer error samples than models
        SingularCovariance: If the error covariance cannot be inverted
    """
    forecasts = _check_forecasts(forecasts)
    past_errors = np.asarray(past_errors, dtype=float)
    S, m = past_errors.shape
    if m != forecasts.shape[0]:
        raise InvalidParameter("past_errors and forecasts disagree on the number of models")
    if S < m:
        raise InsufficientObservations(f"{S} error samples are too few for {m} models")
    w = minvar_weights(np.cov(past_errors, rowvar=False), ridge)
    weights = EnsembleWeights('minvar', dict(zip(_model_ids(model_ids, m), w)), f"{S} past errors")
    return np.tensordot(w, forecasts, axes=1), weights


def cols_weights(past_realized: np.ndarray, past_forecasts: np.ndarray, strict: bool = False) -> np.ndarray:
    """
    min ||y - F w||^2 subject to 1'w = 1

    Writing w = 1/m + N z with N an orthonormal basis of the plane 1'w = 0
    turns the problem into unconstrained least squares in z. Degenerate
    designs get the minimum-norm z, so identical columns give equal weights.

    Raises:
        RankDeficient: If strict and F is singular on the constraint plane
    """
    y = np.asarray(past_realized, dtype=float)
    F = np.asarray(past_forecasts, dtype=float)
    m = F.shape[1]
    equal = np.full(m, 1.0 / m)
    basis = null_space(np.ones((1, m)))
    design = F @ basis
    # rank is judged against the scale of F, not of the projected design
    U, s, Vt = np.linalg.svd(design, full_matrices=False)
    tol = max(design.shape) * np.finfo(float).eps * max(np.linalg.norm(F, 2), np.finfo(float).tiny)
    keep = s > tol
    rank = int(keep.sum())
    z = Vt[keep].T @ ((U[:, keep].T @ (y - F @ equal)) / s[keep])
    if rank < m - 1:
        if strict:
            raise RankDeficient(f"COLS design has rank {rank} on a {m - 1}-dimensional plane")
        logger.debug("COLS design rank %d < %d, using the minimum-norm solution", rank, m - 1)
    w = equal + basis @ z
    return w / w.sum()


def combine_cols(
    past_realized: Any,
    past_forecasts: Any,
    forecasts: Any,
    model_ids: Optional[Sequence[str]] = None,
    strict: bool = False,
) -> Tuple[np.ndarray, EnsembleWeights]:
    """
    Constrained OLS combination (weights sum to one, sign unrestricted)

    Args:
        past_realized: Realized values, shape (samples,)
        past_forecasts: Past forecasts, shape (samples, models)
        forecasts: Array (models, ...) to combine

    Raises:
        InsufficientObservations: If samples do not exceed models
        RankDeficient: If strict and the design is degenerate
    """
    forecasts = _check_forecasts(forecasts)
    past_forecasts = np.asarray(past_forecasts, dtype=float)
    S, m = past_forecasts.shape
    if m != forecasts.shape[0]:
        raise InvalidParameter("past_forecasts and forecasts disagree on the number of models")
    if S <= m:
        raise InsufficientObservations(f"{S} samples are too few for {m} models")
    w = cols_weights(past_realized, past_forecasts, strict)
    weights = EnsembleWeights('cols', dict(zip(_model_ids(model_ids, m), w)), f"{S} past forecasts")
    return np.tensordot(w, forecasts, axes=1), weights


@dataclass(frozen=True)
class CombinedForecasts:
    """Out-of-sample combination for every stock, shape (stocks, dates)"""
    method: str
    tickers: Tuple[str, ...]
    dates: Tuple[str, ...]
    combined: np.ndarray
    realized: np.ndarray
    final_weights: Mapping[str, EnsembleWeights]
    metadata: Mapping[str, Any] = field(default_factory=dict)

    @property
    def errors(self) -> np.ndarray:
        return self.combined - self.realized

    def rmsfe(self) -> np.ndarray:
        return rmsfe_from_errors(self.errors)

    def mafe(self) -> np.ndarray:
        return mafe_from_errors(self.errors)


def combine_table(
    table: ForecastTable,
    method: str,
    burn_in: int = 60,
    ridge: float = DEFAULT_RIDGE,
    strict: bool = False,
) -> CombinedForecasts:
    """
    Combine every model of a forecast table, stock by stock

    Weights for date s are estimated on the expanding sample of dates before
    s. The first burn_in dates (and any date with too few past samples for
    the method) use the simple average.
    """
    if method not in METHODS:
        raise InvalidParameter(f"method must be one of {METHODS}, got {method!r}")
    m, n, S = table.forecasts.shape
    if m < 2:
        raise InvalidParameter("Combination needs at least two models")
    minimum = {'simple': S + 1, 'minvar': m, 'cols': m + 1}[method]
    start = max(burn_in, minimum) if method != 'simple' else S

    combined = np.empty((n, S))
    final_weights = {}
    for i, ticker in enumerate(table.tickers):
        forecasts = table.forecasts[:, i, :]
        realized = table.realized[i]
        combined[i, :min(start, S)] = combine_simple(forecasts[:, :min(start, S)])
        weights = EnsembleWeights('simple', dict.fromkeys(table.model_ids, 1.0 / m), 'equal weights')
        for s in range(start, S):
            past = forecasts[:, :s].T
            if method == 'minvar':
                combined[i, s], weights = combine_minvar(
                    past - realized[:s, None], forecasts[:, s], table.model_ids, ridge
                )
            else:
                combined[i, s], weights = combine_cols(
                    realized[:s], past, forecasts[:, s], table.model_ids, strict
                )
        final_weights[ticker] = weights
    logger.info("Combined %d models by %s over %d stocks", m, method, n)
    return CombinedForecasts(
        method, table.tickers, table.dates, combined, table.realized, final_weights,
        {'protocol': 'expanding window', 'burn_in': burn_in, 'ridge': ridge},
    )
