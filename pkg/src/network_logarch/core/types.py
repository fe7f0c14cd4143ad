"""
Domain types shared by every module.

All types are immutable after construction: fields are frozen and every
array is stored as a read-only copy. Construction validates the invariants
of each type, so a value that exists is a value that is valid. Each type
round-trips through ``to_dict`` / ``from_dict`` with row-major nested lists
for matrices (see ``core.serialization`` for the canonical JSON form).
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from network_logarch.core.errors import InvalidParameter, InvariantViolation, NonMonotoneDates

ROW_SUM_TOLERANCE: float = 1e-12
WEIGHT_KINDS: Tuple[str, ...] = ('inverse_distance', 'knn')
NORMALIZATIONS: Tuple[str, ...] = ('row_normalized', 'raw')
DISTANCE_KINDS: Tuple[str, ...] = ('euclidean', 'correlation', 'logarch_ar')
ZERO_MODES: Tuple[str, ...] = ('floor_min_nonzero', 'floor_constant')


def _frozen(values: Any, ndim: int, name: str) -> np.ndarray:
    """Copy to a read-only float64 array of the given rank"""
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise InvariantViolation(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    array.setflags(write=False)
    return array


def _check_dates(dates: Sequence[str]) -> None:
    for earlier, later in zip(dates, dates[1:]):
        if not earlier < later:
            raise NonMonotoneDates(f"Dates must be strictly increasing: {earlier!r} then {later!r}")


@dataclass(frozen=True)
class ReturnPanel:
    """n stocks by T days of daily log returns"""
    tickers: Tuple[str, ...]
    dates: Tuple[str, ...]
    returns: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'tickers', tuple(str(t) for t in self.tickers))
        object.__setattr__(self, 'dates', tuple(str(d) for d in self.dates))
        returns = _frozen(self.returns, 2, 'returns')
        object.__setattr__(self, 'returns', returns)
        if returns.shape != (len(self.tickers), len(self.dates)):
            raise InvariantViolation(
                f"returns shape {returns.shape} does not match "
                f"{len(self.tickers)} tickers x {len(self.dates)} dates"
            )
        if len(self.dates) < 2:
            raise InvariantViolation("A return panel needs at least 2 dates")
        if len(set(self.tickers)) != len(self.tickers):
            raise InvariantViolation("Tickers must be unique")
        if not np.all(np.isfinite(returns)):
            raise InvariantViolation("Returns contain missing or non-finite values")
        _check_dates(self.dates)

    @property
    def n(self) -> int:
        return len(self.tickers)

    @property
    def T(self) -> int:
        return len(self.dates)

    def window(self, start: int, stop: int) -> 'ReturnPanel':
        """Sub-panel over time positions start..stop-1"""
        return ReturnPanel(self.tickers, self.dates[start:stop], self.returns[:, start:stop])

    def to_frame(self) -> pd.DataFrame:
        """Wide frame: one row per date, one column per ticker"""
        return pd.DataFrame(self.returns.T, index=list(self.dates), columns=list(self.tickers))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tickers': list(self.tickers),
            'dates': list(self.dates),
            'returns': self.returns.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'ReturnPanel':
        return cls(payload['tickers'], payload['dates'], payload['returns'])


@dataclass(frozen=True)
class ZeroPolicy:
    """How zero returns are floored before taking logs"""
    mode: str = 'floor_min_nonzero'
    constant: Optional[float] = None
    applied_counts: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ZERO_MODES:
            raise InvariantViolation(f"Unknown zero policy mode: {self.mode!r}")
        if self.mode == 'floor_constant':
            if self.constant is None or not self.constant > 0:
                raise InvariantViolation("floor_constant needs a positive constant")
        object.__setattr__(self, 'applied_counts', dict(self.applied_counts))

    @classmethod
    def floor_constant(cls, c: float) -> 'ZeroPolicy':
        return cls(mode='floor_constant', constant=c)

    def describe(self) -> str:
        if self.mode == 'floor_constant':
            return f"floor_constant({self.constant!r})"
        return self.mode

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mode': self.mode,
            'constant': self.constant,
            'applied_counts': dict(sorted(self.applied_counts.items())),
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'ZeroPolicy':
        return cls(payload['mode'], payload.get('constant'), payload.get('applied_counts', {}))


@dataclass(frozen=True)
class LogVolPanel:
    """ln Y^2 panel with the record of the zero floors applied"""
    tickers: Tuple[str, ...]
    dates: Tuple[str, ...]
    values: np.ndarray
    floors: np.ndarray
    zero_policy: ZeroPolicy

    def __post_init__(self):
        object.__setattr__(self, 'tickers', tuple(self.tickers))
        object.__setattr__(self, 'dates', tuple(self.dates))
        values = _frozen(self.values, 2, 'values')
        floors = _frozen(self.floors, 1, 'floors')
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'floors', floors)
        if values.shape != (len(self.tickers), len(self.dates)):
            raise InvariantViolation("values shape does not match tickers x dates")
        if floors.shape != (len(self.tickers),) or not np.all(floors > 0):
            raise InvariantViolation("floors must hold one positive value per stock")
        if not np.all(np.isfinite(values)):
            raise InvariantViolation("log-squared values must be finite")
        extra = set(self.zero_policy.applied_counts) - set(self.tickers)
        if extra:
            raise InvariantViolation(f"applied_counts names unknown tickers: {sorted(extra)}")

    @property
    def n(self) -> int:
        return len(self.tickers)

    @property
    def T(self) -> int:
        return len(self.dates)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tickers': list(self.tickers),
            'dates': list(self.dates),
            'values': self.values.tolist(),
            'floors': self.floors.tolist(),
            'zero_policy': self.zero_policy.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'LogVolPanel':
        return cls(
            payload['tickers'], payload['dates'], payload['values'], payload['floors'],
            ZeroPolicy.from_dict(payload['zero_policy']),
        )


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric pairwise dissimilarities between stocks"""
    d: np.ndarray
    kind: str
    tickers: Tuple[str, ...]
    ar_orders: Optional[Mapping[str, int]] = None

    def __post_init__(self):
        d = _frozen(self.d, 2, 'd')
        object.__setattr__(self, 'd', d)
        object.__setattr__(self, 'tickers', tuple(self.tickers))
        if self.kind not in DISTANCE_KINDS:
            raise InvariantViolation(f"Unknown distance kind: {self.kind!r}")
        if d.shape != (len(self.tickers), len(self.tickers)):
            raise InvariantViolation("distance matrix must be n x n")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise InvariantViolation("distances must be finite and nonnegative")
        if not np.array_equal(d, d.T):
            raise InvariantViolation("distance matrix must be symmetric")
        if np.any(np.diag(d) != 0):
            raise InvariantViolation("distance matrix must have a zero diagonal")
        if self.kind == 'correlation' and np.any(d > 2 + ROW_SUM_TOLERANCE):
            raise InvariantViolation("correlation distances cannot exceed 2")
        if self.ar_orders is not None:
            object.__setattr__(self, 'ar_orders', {str(k): int(v) for k, v in self.ar_orders.items()})

    def to_dict(self) -> Dict[str, Any]:
        return {
            'd': self.d.tolist(),
            'kind': self.kind,
            'tickers': list(self.tickers),
            'ar_orders': None if self.ar_orders is None else dict(self.ar_orders),
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'DistanceMatrix':
        return cls(payload['d'], payload['kind'], payload['tickers'], payload.get('ar_orders'))


@dataclass(frozen=True)
class EdgeWeightMatrix:
    """The W of the network model: nonnegative, zero diagonal"""
    weights: np.ndarray
    kind: str
    normalization: str
    k: Optional[int] = None
    tickers: Tuple[str, ...] = ()

    def __post_init__(self):
        w = _frozen(self.weights, 2, 'weights')
        object.__setattr__(self, 'weights', w)
        object.__setattr__(self, 'tickers', tuple(self.tickers))
        n = w.shape[0]
        if w.shape != (n, n):
            raise InvariantViolation("edge weight matrix must be square")
        if self.tickers and len(self.tickers) != n:
            raise InvariantViolation("tickers do not match the weight matrix size")
        if self.kind not in WEIGHT_KINDS:
            raise InvariantViolation(f"Unknown weight kind: {self.kind!r}")
        if self.normalization not in NORMALIZATIONS:
            raise InvariantViolation(f"Unknown normalization: {self.normalization!r}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvariantViolation("edge weights must be finite and nonnegative")
        if np.any(np.diag(w) != 0):
            raise InvariantViolation("edge weight matrix must not contain self-loops")
        if self.kind == 'knn':
            if self.k is None or not 1 <= self.k <= n - 1:
                raise InvariantViolation(f"knn weights need 1 <= k <= n-1, got k={self.k}")
            nonzero = w != 0
            if np.any(nonzero.sum(axis=1) != self.k) or np.any(w[nonzero] != 1.0 / self.k):
                raise InvariantViolation(f"each knn row must hold exactly {self.k} entries of 1/k")
        if self.normalization == 'row_normalized':
            sums = w.sum(axis=1)
            ok = np.isclose(sums, 1.0, rtol=0, atol=ROW_SUM_TOLERANCE) | (sums == 0)
            if not np.all(ok):
                raise InvariantViolation("row-normalized weights must sum to 1 (or 0) per row")

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def label(self) -> str:
        if self.kind == 'knn':
            return f"knn({self.k})"
        return f"inverse_distance[{self.normalization}]"

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.weights)))) if self.n else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'weights': self.weights.tolist(),
            'kind': self.kind,
            'normalization': self.normalization,
            'k': self.k,
            'tickers': list(self.tickers),
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'EdgeWeightMatrix':
        return cls(
            payload['weights'], payload['kind'], payload['normalization'],
            payload.get('k'), payload.get('tickers', ()),
        )


@dataclass(frozen=True)
class UnivariateFit:
    """log-ARCH(P) estimates from the ARMA representation"""
    phi0: float
    gamma: np.ndarray
    mu_star: float
    residuals: np.ndarray
    std_errors: np.ndarray
    sigma2: float
    aic: float
    bic: float

    def __post_init__(self):
        object.__setattr__(self, 'gamma', _frozen(self.gamma, 1, 'gamma'))
        object.__setattr__(self, 'residuals', _frozen(self.residuals, 1, 'residuals'))
        object.__setattr__(self, 'std_errors', _frozen(self.std_errors, 1, 'std_errors'))
        if self.std_errors.shape != (self.order + 1,):
            raise InvariantViolation("std_errors must cover the intercept and every lag")

    @property
    def order(self) -> int:
        return int(self.gamma.shape[0])

    @property
    def omega(self) -> float:
        # phi0 = omega + mu_star
        return self.phi0 - self.mu_star

    @property
    def nobs(self) -> int:
        return int(self.residuals.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            'phi0': self.phi0,
            'gamma': self.gamma.tolist(),
            'mu_star': self.mu_star,
            'omega': self.omega,
            'order': self.order,
            'residuals': self.residuals.tolist(),
            'std_errors': self.std_errors.tolist(),
            'sigma2': self.sigma2,
            'aic': self.aic,
            'bic': self.bic,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'UnivariateFit':
        return cls(
            payload['phi0'], payload['gamma'], payload['mu_star'], payload['residuals'],
            payload['std_errors'], payload['sigma2'], payload['aic'], payload['bic'],
        )


@dataclass(frozen=True)
class NetworkFit:
    """Network log-ARCH estimates and GMM diagnostics"""
    rho: float
    gamma_diag: np.ndarray
    phi0: np.ndarray
    mu_star: np.ndarray
    residual_panel: np.ndarray
    w_ref: str
    normalization: str
    instrument_depth: int
    rho_fixed: bool = False
    rho_se: float = float('nan')
    gamma_se: Optional[np.ndarray] = None
    j_stat: float = float('nan')
    provenance: str = 'two-step GMM, forward orthogonal deviations'

    def __post_init__(self):
        gamma = _frozen(self.gamma_diag, 1, 'gamma_diag')
        n = gamma.shape[0]
        object.__setattr__(self, 'gamma_diag', gamma)
        object.__setattr__(self, 'phi0', _frozen(self.phi0, 1, 'phi0'))
        object.__setattr__(self, 'mu_star', _frozen(self.mu_star, 1, 'mu_star'))
        object.__setattr__(self, 'residual_panel', _frozen(self.residual_panel, 2, 'residual_panel'))
        se = np.full(n, np.nan) if self.gamma_se is None else self.gamma_se
        object.__setattr__(self, 'gamma_se', _frozen(se, 1, 'gamma_se'))
        if not np.all(np.isfinite(gamma)):
            raise InvariantViolation("gamma_diag entries must be finite")
        if self.phi0.shape != (n,) or self.mu_star.shape != (n,) or self.residual_panel.shape[0] != n:
            raise InvariantViolation("network fit vectors must all have length n")
        if self.normalization == 'row_normalized' and not abs(self.rho) < 1:
            raise InvariantViolation("|rho| must be below 1 for row-normalized W")

    @property
    def n(self) -> int:
        return int(self.gamma_diag.shape[0])

    @property
    def forecast_constant(self) -> np.ndarray:
        """phi0 - mu_star per stock, the bracketed constant of the forecast"""
        return self.phi0 - self.mu_star

    def to_dict(self) -> Dict[str, Any]:
        return {
            'rho': self.rho,
            'gamma_diag': self.gamma_diag.tolist(),
            'phi0': self.phi0.tolist(),
            'mu_star': self.mu_star.tolist(),
            'residual_panel': self.residual_panel.tolist(),
            'w_ref': self.w_ref,
            'normalization': self.normalization,
            'instrument_depth': self.instrument_depth,
            'rho_fixed': self.rho_fixed,
            'rho_se': self.rho_se,
            'gamma_se': self.gamma_se.tolist(),
            'j_stat': self.j_stat,
            'provenance': self.provenance,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'NetworkFit':
        return cls(**dict(payload))


@dataclass(frozen=True)
class ForecastTable:
    """
    One-step log-variance forecasts and realized log squared returns

    forecasts has shape (models, stocks, dates); realized has shape
    (stocks, dates) and is shared by every model.
    """
    model_ids: Tuple[str, ...]
    tickers: Tuple[str, ...]
    dates: Tuple[str, ...]
    forecasts: np.ndarray
    realized: np.ndarray
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'model_ids', tuple(self.model_ids))
        object.__setattr__(self, 'tickers', tuple(self.tickers))
        object.__setattr__(self, 'dates', tuple(self.dates))
        forecasts = _frozen(self.forecasts, 3, 'forecasts')
        realized = _frozen(self.realized, 2, 'realized')
        object.__setattr__(self, 'forecasts', forecasts)
        object.__setattr__(self, 'realized', realized)
        object.__setattr__(self, 'metadata', dict(self.metadata))
        shape = (len(self.model_ids), len(self.tickers), len(self.dates))
        if forecasts.shape != shape or realized.shape != shape[1:]:
            raise InvariantViolation(f"forecast table arrays do not match {shape}")
        if len(set(self.model_ids)) != len(self.model_ids):
            raise InvariantViolation("model ids must be unique")
        _check_dates(self.dates)

    def index_of(self, model_id: str) -> int:
        try:
            return self.model_ids.index(model_id)
        except ValueError:
            raise KeyError(f"Unknown model id: {model_id}")

    def errors(self, model_id: str) -> np.ndarray:
        """Forecast minus realized, shape (stocks, dates)"""
        return self.forecasts[self.index_of(model_id)] - self.realized

    def to_frame(self) -> pd.DataFrame:
        """Long frame with columns model_id, ticker, date, forecast, realized"""
        m, n, s = self.forecasts.shape
        return pd.DataFrame({
            'model_id': np.repeat(self.model_ids, n * s),
            'ticker': np.tile(np.repeat(self.tickers, s), m),
            'date': np.tile(self.dates, m * n),
            'forecast': self.forecasts.ravel(),
            'realized': np.tile(self.realized.ravel(), m),
        })

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, metadata: Optional[Mapping[str, Any]] = None) -> 'ForecastTable':
        """Rebuild from the long layout written by to_frame"""
        if frame.empty:
            raise InvariantViolation("forecast frame is empty")
        model_ids = list(dict.fromkeys(frame['model_id']))
        tickers = list(dict.fromkeys(frame['ticker']))
        dates = sorted(set(frame['date'].astype(str)))
        cube = frame.assign(date=frame['date'].astype(str)).pivot_table(
            index=['model_id', 'ticker'], columns='date', values='forecast', aggfunc='first'
        )
        cube = cube.reindex(
            index=pd.MultiIndex.from_product([model_ids, tickers]), columns=dates
        )
        if cube.isna().to_numpy().any():
            raise InvariantViolation("every (model, ticker) needs one forecast per date")
        realized = frame[frame['model_id'] == model_ids[0]].assign(
            date=lambda f: f['date'].astype(str)
        ).pivot(index='ticker', columns='date', values='realized').reindex(index=tickers, columns=dates)
        return cls(
            model_ids, tickers, dates,
            cube.to_numpy().reshape(len(model_ids), len(tickers), len(dates)),
            realized.to_numpy(), metadata or {},
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'model_ids': list(self.model_ids),
            'tickers': list(self.tickers),
            'dates': list(self.dates),
            'forecasts': self.forecasts.tolist(),
            'realized': self.realized.tolist(),
            'metadata': dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'ForecastTable':
        """
        Raises:
            InvalidParameter: If the payload holds no models, stocks or dates
        """
        if not payload['model_ids'] or not payload['tickers'] or not payload['dates']:
            raise InvalidParameter("Forecast table is empty")
        return cls(
            payload['model_ids'], payload['tickers'], payload['dates'],
            payload['forecasts'], payload['realized'], payload.get('metadata', {}),
        )
