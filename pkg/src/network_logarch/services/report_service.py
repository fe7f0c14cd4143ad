"""
Report Service
Turns a forecast table into the evaluation report: loss tables, DM tables,
Model Confidence Sets, forecast combinations and provenance.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from network_logarch.core.config import Config, get_config
from network_logarch.core.errors import InvalidParameter, NetworkArchError
from network_logarch.core.serialization import content_hash
from network_logarch.core.types import ForecastTable
from network_logarch.services.backtest import BENCHMARK_ID
from network_logarch.services.ensemble import METHODS, CombinedForecasts, combine_table
from network_logarch.services.evaluation import (
    AVERAGE_ROW,
    LOSS_KINDS,
    MCSResult,
    dm_table,
    loss_table,
    mcs_table,
)

logger = logging.getLogger(__name__)


@dataclass
class EvalReport:
    """Everything the report command writes"""
    rmsfe: pd.DataFrame
    mafe: pd.DataFrame
    best_model: Optional[str] = None
    worst_model: Optional[str] = None
    dm: Dict[str, pd.DataFrame] = field(default_factory=dict)
    dm_matrix: Dict[str, pd.DataFrame] = field(default_factory=dict)
    mcs: Dict[str, MCSResult] = field(default_factory=dict)
    ensembles: Dict[str, CombinedForecasts] = field(default_factory=dict)
    provenance: Dict[str, Any] = field(default_factory=dict)

    def ensemble_frame(self) -> pd.DataFrame:
        """Stocks x (method, metric) table with an Average row"""
        columns = {}
        for method, result in self.ensembles.items():
            columns[(method, 'rmsfe')] = result.rmsfe()
            columns[(method, 'mafe')] = result.mafe()
        if not columns:
            return pd.DataFrame()
        tickers = next(iter(self.ensembles.values())).tickers
        frame = pd.DataFrame(columns, index=list(tickers))
        frame.loc[AVERAGE_ROW] = frame.mean(axis=0)
        frame.index.name = 'ticker'
        return frame

    def to_dict(self) -> Dict[str, Any]:
        def averages(frame: pd.DataFrame) -> Dict[str, float]:
            return {k: float(v) for k, v in frame.loc[AVERAGE_ROW].items()}

        return {
            'average_rmsfe': averages(self.rmsfe),
            'average_mafe': averages(self.mafe),
            'best_model': self.best_model,
            'worst_model': self.worst_model,
            'dm': {
                name: json.loads(frame.to_json(orient='index'))
                for name, frame in self.dm.items()
            },
            'dm_matrix': {
                kind: json.loads(frame.to_json(orient='index'))
                for kind, frame in self.dm_matrix.items()
            },
            'mcs': {kind: result.to_dict() for kind, result in self.mcs.items()},
            'ensembles': {
                method: {
                    'average_rmsfe': float(np.mean(result.rmsfe())),
                    'average_mafe': float(np.mean(result.mafe())),
                    'final_weights': {t: w.to_dict() for t, w in result.final_weights.items()},
                    'metadata': dict(result.metadata),
                }
                for method, result in self.ensembles.items()
            },
            'provenance': self.provenance,
        }


class ReportService:
    """Service layer for forecast evaluation"""

    def __init__(self, config: Optional[Config] = None):
        """
        Initialize report service

        Args:
            config: Optional Config; the global configuration is used when None
        """
        self.config = config or get_config()

    def _rank_network_models(self, rmsfe: pd.DataFrame, benchmark: str):
        averages = rmsfe.loc[AVERAGE_ROW].drop(labels=[benchmark], errors='ignore')
        if averages.empty:
            return None, None
        return str(averages.idxmin()), str(averages.idxmax())

    def build_report(self, table: ForecastTable, benchmark: str = BENCHMARK_ID) -> EvalReport:
        """
        Evaluate every model of a forecast table

        DM statistics compare the benchmark with every other model; the full
        tables of the best and the worst model by average RMSFE are kept as
        well. MCS and combinations need at least two models.

        Raises:
            InvalidParameter: If the table holds no forecasts
        """
        if not table.dates or not table.model_ids or not table.tickers:
            raise InvalidParameter("Forecast table is empty")
        config = self.config
        logger.info("Evaluating %d models on %d stocks over %d dates", len(table.model_ids), len(table.tickers), len(table.dates))

        report = EvalReport(loss_table(table, 'rmsfe'), loss_table(table, 'mafe'))
        if benchmark in table.model_ids:
            report.best_model, report.worst_model = self._rank_network_models(report.rmsfe, benchmark)
        if report.best_model is not None:
            tables = {}
            for model in table.model_ids:
                if model == benchmark:
                    continue
                try:
                    tables[model] = dm_table(table, benchmark, model)
                except NetworkArchError as e:
                    logger.warning("Skipping DM table for %s: %s", model, e)
            for kind in LOSS_KINDS:
                matrix = pd.DataFrame({model: t[f"dm_{kind}"] for model, t in tables.items()})
                matrix.index.name = 'ticker'
                report.dm_matrix[kind] = matrix
            for label, model in (('best', report.best_model), ('worst', report.worst_model)):
                if model in tables:
                    report.dm[label] = tables[model]

        if len(table.model_ids) >= 2:
            for kind in LOSS_KINDS:
                report.mcs[kind] = mcs_table(
                    table, kind, config.alpha, config.bootstrap_reps, config.block_len, config.seed
                )
            for method in METHODS:
                report.ensembles[method] = combine_table(
                    table, method, config.ensemble_burn_in, config.minvar_ridge
                )
        else:
            logger.info("Single model table: skipping MCS and combinations")

        report.provenance = {
            'forecast_table_hash': content_hash(table),
            'benchmark': benchmark,
            'seed': config.seed,
            'alpha': config.alpha,
            'bootstrap_reps': config.bootstrap_reps,
            'block_len': config.block_len,
            'ensemble_protocol': {
                'window': 'expanding',
                'burn_in': config.ensemble_burn_in,
                'minvar_ridge': config.minvar_ridge,
            },
            'backtest': dict(table.metadata),
        }
        return report

    def write_report(self, report: EvalReport, out_dir: Union[str, Path]) -> Dict[str, Path]:
        """
        Write CSV tables and report.json into out_dir

        Returns:
            Mapping of artifact name to written path
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            'rmsfe': out_dir / 'rmsfe.csv',
            'mafe': out_dir / 'mafe.csv',
        }
        report.rmsfe.to_csv(paths['rmsfe'])
        report.mafe.to_csv(paths['mafe'])
        for label, frame in report.dm.items():
            paths[f"dm_{label}"] = out_dir / f"dm_{label}.csv"
            frame.to_csv(paths[f"dm_{label}"])
        for kind, matrix in report.dm_matrix.items():
            paths[f"dm_matrix_{kind}"] = out_dir / f"dm_matrix_{kind}.csv"
            matrix.to_csv(paths[f"dm_matrix_{kind}"])
        for kind, result in report.mcs.items():
            paths[f"mcs_{kind}"] = out_dir / f"mcs_{kind}.csv"
            result.to_frame().to_csv(paths[f"mcs_{kind}"])
        if report.ensembles:
            paths['ensemble'] = out_dir / 'ensemble.csv'
            report.ensemble_frame().to_csv(paths['ensemble'])
        paths['report'] = out_dir / 'report.json'
        paths['report'].write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True, default=str), encoding='utf-8'
        )
        logger.info("Report written to %s", out_dir)
        return paths
