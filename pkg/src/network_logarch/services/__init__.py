"""
Services module for network log-ARCH forecasting
Contains estimation, backtesting, evaluation and reporting.
"""

from network_logarch.services.backtest import (
    BacktestConfig,
    ModelSpec,
    model_registry,
    resolve_models,
    run_backtest,
)
from network_logarch.services.ensemble import (
    EnsembleWeights,
    combine_cols,
    combine_minvar,
    combine_simple,
    combine_table,
)
from network_logarch.services.evaluation import (
    DMResult,
    LossSeries,
    MCSResult,
    compute_losses,
    dm_test,
    mafe,
    mcs,
    rmsfe,
)
from network_logarch.services.network_builder import (
    build_edge_weights,
    dist_correlation,
    dist_euclidean,
    dist_logarch,
    export_graph,
    weights_inverse_distance,
    weights_knn,
)
from network_logarch.services.network_model import (
    NetworkGMM,
    fit_network_logarch,
    forecast_network_one_step,
    helmert_transform,
)
from network_logarch.services.report_service import EvalReport, ReportService
from network_logarch.services.univariate import (
    estimate_mu_star,
    fit_logarch,
    forecast_one_step,
    select_ar_order,
)

__all__ = [
    'BacktestConfig',
    'ModelSpec',
    'model_registry',
    'resolve_models',
    'run_backtest',
    'EnsembleWeights',
    'combine_cols',
    'combine_minvar',
    'combine_simple',
    'combine_table',
    'DMResult',
    'LossSeries',
    'MCSResult',
    'compute_losses',
    'dm_test',
    'mafe',
    'mcs',
    'rmsfe',
    'build_edge_weights',
    'dist_correlation',
    'dist_euclidean',
    'dist_logarch',
    'export_graph',
    'weights_inverse_distance',
    'weights_knn',
    'NetworkGMM',
    'fit_network_logarch',
    'forecast_network_one_step',
    'helmert_transform',
    'EvalReport',
    'ReportService',
    'estimate_mu_star',
    'fit_logarch',
    'forecast_one_step',
    'select_ar_order',
]
