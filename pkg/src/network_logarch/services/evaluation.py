"""
Evaluation Service
Forecast losses, Diebold-Mariano tests and the Model Confidence Set.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from arch.bootstrap import MovingBlockBootstrap
from scipy.stats import norm

from network_logarch.core.errors import (
    BootstrapDegenerate,
    InsufficientObservations,
    InvalidParameter,
    ZeroVariance,
)
from network_logarch.core.types import ForecastTable

logger = logging.getLogger(__name__)

# Constants
LOSS_KINDS: Tuple[str, ...] = ('squared', 'absolute')
MIN_DM_OBSERVATIONS: int = 30
AVERAGE_ROW: str = 'Average'


def _check_kind(loss_kind: str) -> None:
    if loss_kind not in LOSS_KINDS:
        raise InvalidParameter(f"loss_kind must be one of {LOSS_KINDS}, got {loss_kind!r}")


def loss_values(errors: np.ndarray, loss_kind: str) -> np.ndarray:
    """g(e): e^2 for squared loss, |e| for absolute loss"""
    _check_kind(loss_kind)
    errors = np.asarray(errors, dtype=float)
    return errors ** 2 if loss_kind == 'squared' else np.abs(errors)


def rmsfe_from_errors(errors: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.sqrt(np.mean(np.square(errors), axis=axis))


def mafe_from_errors(errors: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.mean(np.abs(errors), axis=axis)


@dataclass(frozen=True)
class LossSeries:
    """Squared and absolute forecast errors, arrays of shape (models, stocks, dates)"""
    model_ids: Tuple[str, ...]
    tickers: Tuple[str, ...]
    squared: np.ndarray
    absolute: np.ndarray

    def __post_init__(self):
        if self.squared.shape != self.absolute.shape:
            raise InvalidParameter("squared and absolute losses must have the same shape")
        if np.any(self.squared < 0) or np.any(self.absolute < 0):
            raise InvalidParameter("losses must be nonnegative")

    @property
    def length(self) -> int:
        return int(self.squared.shape[2])

    def of(self, loss_kind: str) -> np.ndarray:
        _check_kind(loss_kind)
        return self.squared if loss_kind == 'squared' else self.absolute

    def series(self, model_id: str, ticker: str, loss_kind: str) -> np.ndarray:
        return self.of(loss_kind)[self.model_ids.index(model_id), self.tickers.index(ticker)]

    def cross_stock_average(self, loss_kind: str) -> np.ndarray:
        """Average loss over stocks per date and model, shape (dates, models)"""
        return self.of(loss_kind).mean(axis=1).T


def compute_losses(table: ForecastTable) -> LossSeries:
    errors = table.forecasts - table.realized[np.newaxis]
    return LossSeries(table.model_ids, table.tickers, errors ** 2, np.abs(errors))


def rmsfe(table: ForecastTable, model: str, stock: str) -> float:
    """sqrt(mean (ln h - ln y^2)^2) over the out-of-sample dates"""
    errors = table.errors(model)[table.tickers.index(stock)]
    return float(rmsfe_from_errors(errors))


def mafe(table: ForecastTable, model: str, stock: str) -> float:
    """mean |ln h - ln y^2| over the out-of-sample dates"""
    errors = table.errors(model)[table.tickers.index(stock)]
    return float(mafe_from_errors(errors))


def loss_table(table: ForecastTable, metric: str = 'rmsfe') -> pd.DataFrame:
    """
    Stocks x models table of RMSFE or MAFE with an Average row appended

    The Average row is the plain mean of the per-stock values.
    """
    if metric not in ('rmsfe', 'mafe'):
        raise InvalidParameter(f"metric must be 'rmsfe' or 'mafe', got {metric!r}")
    errors = table.forecasts - table.realized[np.newaxis]
    values = rmsfe_from_errors(errors) if metric == 'rmsfe' else mafe_from_errors(errors)
    frame = pd.DataFrame(values.T, index=list(table.tickers), columns=list(table.model_ids))
    frame.loc[AVERAGE_ROW] = frame.mean(axis=0)
    frame.index.name = 'ticker'
    return frame


@dataclass(frozen=True)
class DMResult:
    stat: float
    p_value: float
    loss_kind: str
    variance_est: float
    mean_diff: float
    lag: int
    nobs: int

    def to_dict(self) -> Dict[str, float]:
        return {
            'stat': self.stat,
            'p_value': self.p_value,
            'loss_kind': self.loss_kind,
            'variance_est': self.variance_est,
            'mean_diff': self.mean_diff,
            'lag': self.lag,
            'nobs': self.nobs,
        }


def hac_lag(nobs: int) -> int:
    """Bartlett truncation lag floor(S^(1/3))"""
    lag = int(math.floor(nobs ** (1.0 / 3.0)))
    # float cube roots can land just below an exact integer
    while (lag + 1) ** 3 <= nobs:
        lag += 1
    while lag ** 3 > nobs:
        lag -= 1
    return lag


def long_run_variance(d: np.ndarray, lag: int) -> float:
    """Newey-West estimate with Bartlett weights 1 - k/(lag+1)"""
    centered = d - d.mean()
    S = centered.shape[0]
    lrv = centered @ centered / S
    for k in range(1, lag + 1):
        gamma_k = centered[k:] @ centered[:-k] / S
        lrv += 2.0 * (1.0 - k / (lag + 1.0)) * gamma_k
    return float(lrv)


def dm_test(loss_a: Sequence[float], loss_b: Sequence[float], loss_kind: str = 'squared', lag: Optional[int] = None) -> DMResult:
    """
    Diebold-Mariano test of equal predictive accuracy

    The inputs are loss series g(e), already squared or absolute. With
    d_t = loss_a - loss_b the null is that model a is at least as accurate as
    model b; the one-sided p-value is P(Z > DM).

    Raises:
        InvalidParameter: If the series lengths differ
        InsufficientObservations: If fewer than 30 observations are given
        ZeroVariance: If the loss differential has no variation
    """
    _check_kind(loss_kind)
    a = np.asarray(loss_a, dtype=float)
    b = np.asarray(loss_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidParameter(f"Loss series must be 1-D and of equal length, got {a.shape} and {b.shape}")
    if a.shape[0] < MIN_DM_OBSERVATIONS:
        raise InsufficientObservations(
            f"DM test needs at least {MIN_DM_OBSERVATIONS} observations, got {a.shape[0]}"
        )
    d = a - b
    if not np.any(d):
        raise ZeroVariance("Loss differential is identically zero")
    lag = hac_lag(d.shape[0]) if lag is None else lag
    lrv = long_run_variance(d, lag)
    if not lrv > 0:
        raise ZeroVariance(f"Long-run variance of the loss differential is {lrv}")
    variance = lrv / d.shape[0]
    mean_diff = float(d.mean())
    stat = mean_diff / math.sqrt(variance)
    return DMResult(stat, float(norm.sf(stat)), loss_kind, variance, mean_diff, lag, d.shape[0])


def dm_table(table: ForecastTable, benchmark: str, model: str) -> pd.DataFrame:
    """
    Per-stock DM statistics of benchmark against model for both loss kinds

    Degenerate pairs are recorded with a NaN statistic and p-value 1.
    """
    losses = compute_losses(table)
    rows = []
    for ticker in table.tickers:
        row = {'ticker': ticker}
        for kind in LOSS_KINDS:
            try:
                result = dm_test(
                    losses.series(benchmark, ticker, kind), losses.series(model, ticker, kind), kind
                )
                row[f"dm_{kind}"], row[f"p_{kind}"] = result.stat, result.p_value
            except ZeroVariance:
                logger.warning("DM %s vs %s on %s (%s loss) is undefined", benchmark, model, ticker, kind)
                row[f"dm_{kind}"], row[f"p_{kind}"] = float('nan'), 1.0
        rows.append(row)
    return pd.DataFrame(rows).set_index('ticker')


@dataclass(frozen=True)
class MCSEntry:
    model_id: str
    rank: int
    elimination_stat: float
    p_value: float
    loss: float


@dataclass(frozen=True)
class MCSResult:
    """
    Outcome of the Model Confidence Set procedure

    entries are ordered by rank; rank 1 is the last model standing.
    """
    superior_set: Tuple[str, ...]
    entries: Tuple[MCSEntry, ...]
    alpha: float
    loss_kind: str
    reps: int
    block_len: int
    seed: int
    round_p_values: Tuple[float, ...] = field(default_factory=tuple)

    def entry(self, model_id: str) -> MCSEntry:
        for e in self.entries:
            if e.model_id == model_id:
                return e
        raise KeyError(f"Unknown model id: {model_id}")

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([asdict(e) for e in self.entries]).set_index('model_id')
        frame['in_superior_set'] = frame.index.isin(self.superior_set)
        return frame

    def to_dict(self) -> Dict:
        return {
            'superior_set': list(self.superior_set),
            'entries': [asdict(e) for e in self.entries],
            'alpha': self.alpha,
            'loss_kind': self.loss_kind,
            'reps': self.reps,
            'block_len': self.block_len,
            'seed': self.seed,
            'round_p_values': list(self.round_p_values),
        }


def block_bootstrap_counts(nobs: int, reps: int, block_len: int, seed: int) -> np.ndarray:
    """
    Moving-block bootstrap draws as counts, shape (reps, nobs)

    counts[b, t] is how many times observation t appears in replicate b, so
    replicate means are counts @ x / nobs. Index draws come from a
    MovingBlockBootstrap driven by a Philox generator seeded with seed.
    """
    if not 1 <= block_len <= nobs:
        raise InvalidParameter(f"block_len must be in 1..{nobs}, got {block_len}")
    bs = MovingBlockBootstrap(
        block_len, np.arange(nobs), seed=np.random.Generator(np.random.Philox(seed))
    )
    counts = np.zeros((reps, nobs))
    for b, (data, _) in enumerate(bs.bootstrap(reps)):
        counts[b] = np.bincount(data[0], minlength=nobs)
    return counts


def _pairwise_t(means: np.ndarray, boot_means: np.ndarray, members: List[int]):
    """t_ij, the centred bootstrap t-values and the per-model elimination statistics"""
    idx = np.asarray(members)
    d = means[idx][:, None] - means[idx][None, :]
    d_boot = boot_means[:, idx][:, :, None] - boot_means[:, idx][:, None, :]
    centred = d_boot - d[None]
    var = np.mean(centred ** 2, axis=0)
    positive = var > 0
    t = np.zeros_like(d)
    np.divide(d, np.sqrt(var), out=t, where=positive)
    # a constant nonzero differential is an infinitely strong signal
    t[~positive & (d != 0)] = np.sign(d[~positive & (d != 0)]) * np.inf
    t_boot = np.zeros_like(centred)
    np.divide(centred, np.sqrt(var)[None], out=t_boot, where=positive[None])
    off_diagonal = ~np.eye(len(idx), dtype=bool)
    elimination = np.where(off_diagonal, t, -np.inf).max(axis=1)
    return t, t_boot, elimination


def mcs(
    losses: np.ndarray,
    model_ids: Sequence[str],
    alpha: float = 0.10,
    reps: int = 5000,
    block_len: int = 10,
    seed: int = 0,
    loss_kind: str = 'squared',
) -> MCSResult:
    """
    Model Confidence Set with the range statistic and a moving-block bootstrap

    Args:
        losses: Array of shape (dates, models), usually the cross-stock average loss
        model_ids: One id per column
        alpha: Size of the equivalence tests
        reps, block_len, seed: Bootstrap settings; a fixed seed reproduces the result

    Every round tests equal predictive ability with T_R = max |t_ij| and
    removes the model with the largest max_j t_ij, until one model remains.
    A model's MCS p-value is the largest round p-value up to its removal;
    the superior set holds the models with p-value >= alpha.

    Raises:
        InvalidParameter: If fewer than two models are given
        BootstrapDegenerate: If every pairwise loss differential is constant and not all are zero
    """
    losses = np.asarray(losses, dtype=float)
    if losses.ndim != 2 or losses.shape[1] != len(model_ids):
        raise InvalidParameter("losses must have shape (dates, models) matching model_ids")
    if len(model_ids) < 2:
        raise InvalidParameter("MCS needs at least two models")
    if len(set(model_ids)) != len(model_ids):
        raise InvalidParameter("Model ids must be unique")
    if not 0 < alpha < 1:
        raise InvalidParameter(f"alpha must lie in (0, 1), got {alpha}")

    # work in sorted id order so the outcome does not depend on column order
    order = sorted(range(len(model_ids)), key=lambda i: model_ids[i])
    ids = [model_ids[i] for i in order]
    losses = losses[:, order]

    differentials = losses[:, :, None] - losses[:, None, :]
    constant = np.all(differentials == differentials[:1], axis=0)
    if np.all(constant) and np.any(differentials[0]):
        raise BootstrapDegenerate("Every loss differential is constant over time")

    S = losses.shape[0]
    counts = block_bootstrap_counts(S, reps, block_len, seed)
    means = losses.mean(axis=0)
    boot_means = counts @ losses / S

    members = list(range(len(ids)))
    eliminated: List[Tuple[int, float, float]] = []
    round_p: List[float] = []
    running_p = 0.0
    while len(members) > 1:
        t, t_boot, elimination = _pairwise_t(means, boot_means, members)
        statistic = np.max(np.abs(t))
        boot_statistic = np.max(np.abs(t_boot).reshape(reps, -1), axis=1)
        p_value = float(np.mean(boot_statistic >= statistic))
        round_p.append(p_value)
        running_p = max(running_p, p_value)
        worst = int(np.argmax(elimination))
        eliminated.append((members[worst], float(elimination[worst]), running_p))
        logger.debug("MCS round %d: T_R=%.4f p=%.4f drop %s", len(round_p), statistic, p_value, ids[members[worst]])
        if len(members) == 2:
            survivor = members[1 - worst]
            eliminated.append((survivor, float(elimination[1 - worst]), 1.0))
        members.pop(worst)

    entries = []
    for rank, (i, stat, p) in enumerate(reversed(eliminated), start=1):
        entries.append(MCSEntry(ids[i], rank, stat, p, float(means[i])))
    superior = tuple(e.model_id for e in entries if e.p_value >= alpha)
    logger.info("MCS (%s loss, alpha=%.2f): superior set %s", loss_kind, alpha, ', '.join(superior))
    return MCSResult(superior, tuple(entries), alpha, loss_kind, reps, block_len, seed, tuple(round_p))


def mcs_table(table: ForecastTable, loss_kind: str = 'squared', alpha: float = 0.10, reps: int = 5000, block_len: int = 10, seed: int = 0) -> MCSResult:
    """MCS on the cross-stock average loss of every model in a forecast table"""
    losses = compute_losses(table).cross_stock_average(loss_kind)
    return mcs(losses, table.model_ids, alpha, reps, block_len, seed, loss_kind)
