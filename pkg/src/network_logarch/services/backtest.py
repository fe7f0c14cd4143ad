"""
Backtest Service
Rolling-window out-of-sample driver: every model is re-estimated on the
latest M observations and forecasts the next day's log variance.
"""

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from network_logarch.core.config import Config, get_config
from network_logarch.core.errors import BacktestStepError, InvalidParameter, NetworkArchError
from network_logarch.core.serialization import content_hash
from network_logarch.core.types import DistanceMatrix, EdgeWeightMatrix, ForecastTable, ReturnPanel, ZeroPolicy
from network_logarch.services.network_builder import compute_distance, weights_from_distance
from network_logarch.services.network_model import fit_network_logarch, forecast_network_one_step
from network_logarch.services.univariate import fit_panel, forecast_panel
from network_logarch.utils.data_loader import floor_log_squared, log_squared, squared_returns

logger = logging.getLogger(__name__)

# Constants
BENCHMARK_ID: str = 'logarch'
ALL_MODELS: str = 'all13'
DISTANCE_CODES: Dict[int, str] = {1: 'euclidean', 2: 'correlation', 3: 'logarch'}
KNN_SIZES: Tuple[int, ...] = (3, 5, 10)
MIN_WINDOW: int = 100
MODEL_ID_PATTERN = re.compile(r'^(?:A\.(?P<a>[123])|B\.(?P<k>\d+)\.(?P<b>[123]))$')


@dataclass(frozen=True)
class ModelSpec:
    """One forecasting model: the benchmark or a network configuration"""
    model_id: str
    family: str
    distance: Optional[str] = None
    weighting: Optional[str] = None
    k: Optional[int] = None

    @property
    def is_network(self) -> bool:
        return self.family == 'network'


def parse_model_id(model_id: str) -> ModelSpec:
    """
    Parse 'logarch', 'A.m' (inverse distance) or 'B.k.m' (k nearest neighbours)

    m selects the distance: 1 euclidean, 2 correlation, 3 log-ARCH AR coefficients.
    """
    model_id = model_id.strip()
    if model_id == BENCHMARK_ID:
        return ModelSpec(BENCHMARK_ID, 'logarch')
    match = MODEL_ID_PATTERN.match(model_id)
    if not match:
        raise InvalidParameter(f"Unknown model id: {model_id!r}")
    if match.group('a'):
        return ModelSpec(model_id, 'network', DISTANCE_CODES[int(match.group('a'))], 'invdist')
    return ModelSpec(
        model_id, 'network', DISTANCE_CODES[int(match.group('b'))], 'knn', int(match.group('k'))
    )


def model_registry() -> List[ModelSpec]:
    """The benchmark plus the twelve network models"""
    ids = [BENCHMARK_ID] + [f"A.{m}" for m in (1, 2, 3)]
    ids += [f"B.{k}.{m}" for k in KNN_SIZES for m in (1, 2, 3)]
    return [parse_model_id(i) for i in ids]


def resolve_models(selection: Union[str, Sequence[str]]) -> Tuple[ModelSpec, ...]:
    """Model specs from 'all13', a comma separated string or a list of ids"""
    if isinstance(selection, str):
        if selection.strip() == ALL_MODELS:
            return tuple(model_registry())
        selection = [s for s in selection.split(',') if s.strip()]
    specs = tuple(parse_model_id(s) for s in selection)
    if not specs:
        raise InvalidParameter("At least one model is required")
    if len({s.model_id for s in specs}) != len(specs):
        raise InvalidParameter("Model ids must be unique")
    return specs


@dataclass(frozen=True)
class BacktestConfig:
    """Rolling-window protocol settings"""
    window_len: int = 2540
    models: Tuple[ModelSpec, ...] = field(default_factory=lambda: tuple(model_registry()))
    refit_w_each_step: bool = False
    horizon: int = 1
    arch_order: int = 1
    instrument_depth: int = 2
    zero_policy: ZeroPolicy = field(default_factory=ZeroPolicy)
    normalize_inverse: bool = True
    ar_max_order: int = 5
    ar_criterion: str = 'bic'
    workers: int = 1
    show_progress: bool = False

    def __post_init__(self):
        if self.window_len < MIN_WINDOW:
            raise InvalidParameter(f"Window length must be at least {MIN_WINDOW}, got {self.window_len}")
        if self.horizon != 1:
            raise InvalidParameter("Only one-step-ahead forecasts are supported")
        if not self.models:
            raise InvalidParameter("At least one model is required")

    @classmethod
    def from_config(cls, models: Union[str, Sequence[str]] = ALL_MODELS, config: Optional[Config] = None) -> 'BacktestConfig':
        """Build from the global experiment configuration"""
        config = config or get_config()
        return cls(
            window_len=config.window_len,
            models=resolve_models(models),
            refit_w_each_step=config.refit_w_each_step,
            arch_order=config.arch_order,
            instrument_depth=config.instrument_depth,
            zero_policy=zero_policy_for(config),
            normalize_inverse=config.normalize_inverse,
            ar_max_order=config.ar_max_order,
            ar_criterion=config.ar_criterion,
            workers=config.workers,
            show_progress=config.show_progress,
        )


def zero_policy_for(config: Config) -> ZeroPolicy:
    if config.zero_policy == 'floor_constant':
        return ZeroPolicy.floor_constant(config.zero_floor)
    return ZeroPolicy()


class BacktestRunner:
    """Runs the rolling window for one panel and one configuration"""

    def __init__(self, panel: ReturnPanel, config: BacktestConfig):
        if config.window_len >= panel.T:
            raise InvalidParameter(
                f"Window length {config.window_len} must be below the panel length {panel.T}"
            )
        self.panel = panel
        self.config = config
        self.steps = panel.T - config.window_len
        self.initial_weights: Dict[str, EdgeWeightMatrix] = {}
        self.step_weight_hashes: Dict[int, Dict[str, str]] = {}
        zeros = int((squared_returns(panel.returns) == 0).sum())
        if zeros:
            logger.warning(
                "%d zero returns are floored in every window (%s)", zeros, config.zero_policy.describe()
            )
        if not config.refit_w_each_step:
            self.initial_weights = self._build_weights(0)

    def _build_weights(self, step: int) -> Dict[str, EdgeWeightMatrix]:
        """W for every network model from the window starting at step"""
        network_specs = [s for s in self.config.models if s.is_network]
        if not network_specs:
            return {}
        window = self.panel.window(step, step + self.config.window_len)
        volpanel = log_squared(window, self.config.zero_policy, warn=False)
        distances: Dict[str, DistanceMatrix] = {}
        weights = {}
        for spec in network_specs:
            try:
                if spec.distance not in distances:
                    distances[spec.distance] = compute_distance(
                        window, spec.distance, volpanel,
                        self.config.ar_max_order, self.config.ar_criterion,
                    )
                weights[spec.model_id] = weights_from_distance(
                    distances[spec.distance], spec.weighting, spec.k, self.config.normalize_inverse
                )
            except NetworkArchError as e:
                raise BacktestStepError(spec.model_id, step, e) from e
        return weights

    def run_step(self, step: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Fit every model on observations step..step+M-1 and forecast step+M

        Returns:
            (forecasts of shape (models, stocks), realized ln y^2 of shape (stocks,))
        """
        M = self.config.window_len
        window = self.panel.window(step, step + M)
        volpanel = log_squared(window, self.config.zero_policy, warn=False)
        realized = floor_log_squared(self.panel.returns[:, step + M], volpanel.floors)
        if self.config.refit_w_each_step:
            weights = self._build_weights(step)
            self.step_weight_hashes[step] = {mid: content_hash(w) for mid, w in weights.items()}
        else:
            weights = self.initial_weights

        forecasts = np.empty((len(self.config.models), self.panel.n))
        for m, spec in enumerate(self.config.models):
            try:
                if spec.is_network:
                    w = weights[spec.model_id]
                    fit = fit_network_logarch(volpanel, w, self.config.instrument_depth)
                    forecasts[m] = forecast_network_one_step(fit, w, volpanel.values[:, -1])
                else:
                    fits = fit_panel(volpanel, self.config.arch_order)
                    forecasts[m] = forecast_panel(fits, volpanel)
            except NetworkArchError as e:
                raise BacktestStepError(spec.model_id, step, e) from e
        return forecasts, realized

    def run(self) -> ForecastTable:
        logger.info(
            "Backtest: %d models, %d stocks, window %d, %d steps",
            len(self.config.models), self.panel.n, self.config.window_len, self.steps,
        )
        progress = tqdm(total=self.steps, desc='backtest', disable=not self.config.show_progress)
        results = []
        with ThreadPoolExecutor(max_workers=self.config.workers) as executor:
            for result in executor.map(self.run_step, range(self.steps)):
                results.append(result)
                progress.update(1)
        progress.close()

        forecasts = np.stack([f for f, _ in results], axis=2)
        realized = np.column_stack([r for _, r in results])
        metadata = {
            'panel_hash': content_hash(self.panel),
            'window_len': self.config.window_len,
            'arch_order': self.config.arch_order,
            'instrument_depth': self.config.instrument_depth,
            'zero_policy': self.config.zero_policy.describe(),
            'inverse_distance_normalization': 'row_normalized' if self.config.normalize_inverse else 'raw',
            'refit_w_each_step': self.config.refit_w_each_step,
            'ar_max_order': self.config.ar_max_order,
            'ar_criterion': self.config.ar_criterion,
            'weight_hashes': {mid: content_hash(w) for mid, w in self.initial_weights.items()},
        }
        if self.config.refit_w_each_step:
            M = self.config.window_len
            metadata['weight_hashes'] = dict(self.step_weight_hashes.get(0, {}))
            metadata['weight_hashes_by_date'] = {
                self.panel.dates[step + M]: hashes for step, hashes in sorted(self.step_weight_hashes.items())
            }
        logger.info("Backtest finished: %d forecasts per model and stock", self.steps)
        return ForecastTable(
            [s.model_id for s in self.config.models],
            self.panel.tickers,
            self.panel.dates[self.config.window_len:],
            forecasts,
            realized,
            metadata,
        )


def run_backtest(panel: ReturnPanel, config: BacktestConfig) -> ForecastTable:
    """
    Rolling-window one-step forecasts for every configured model

    W is built once on the first window unless refit_w_each_step is set.
    Forecasts at a date use the same training window for every model.

    Raises:
        InvalidParameter: If the window is not shorter than the panel
        BacktestStepError: If a model fails, annotated with model id and step
    """
    return BacktestRunner(panel, config).run()
