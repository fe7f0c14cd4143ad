"""
Network log-ARCH command line
Batch front-end for the forecasting experiment.

Run with: python app/cli.py <ingest|network|backtest|report|simulate> ...
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

# Add src directory to Python path
project_root = Path(__file__).parent.parent
src_path = project_root / "src"
if str(src_path) not in sys.path:
    sys.path.insert(0, str(src_path))

import numpy as np
from scipy.spatial.distance import pdist, squareform

from network_logarch.core.config import Config, set_config
from network_logarch.core.errors import InvalidParameter, NetworkArchError, UsageError
from network_logarch.core.serialization import load_artifact, save_artifact
from network_logarch.core.types import DistanceMatrix, EdgeWeightMatrix, ForecastTable, ReturnPanel
from network_logarch.services.backtest import (
    ALL_MODELS,
    DISTANCE_CODES,
    BacktestConfig,
    run_backtest,
    zero_policy_for,
)
from network_logarch.services.network_builder import (
    DISTANCES,
    WEIGHTINGS,
    compute_distance,
    distance_to_csv,
    export_graph,
    weights_from_distance,
    weights_knn,
)
from network_logarch.services.report_service import ReportService
from network_logarch.utils.data_loader import LAYOUTS, log_squared, read_csv_panel, summarize_panel
from network_logarch.utils.simulate import InnovationSpec, simulate_network, simulate_univariate, synthetic_dates

logger = logging.getLogger('network_logarch.cli')

# Constants
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
ZERO_POLICIES = ('floor_min_nonzero', 'floor_constant')
DISTANCE_INDEX: Dict[str, int] = {name: code for code, name in DISTANCE_CODES.items()}


class _ArgumentParser(argparse.ArgumentParser):
    """Parser whose usage errors become UsageError instead of SystemExit"""

    def error(self, message):
        raise UsageError(message)


def network_model_id(distance: str, weighting: str, k: Optional[int]) -> str:
    """'A.m' for inverse distance, 'B.k.m' for k nearest neighbours"""
    if weighting == 'knn':
        return f"B.{k}.{DISTANCE_INDEX[distance]}"
    return f"A.{DISTANCE_INDEX[distance]}"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, help='JSON config file')
    common.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR')
    common.add_argument('--seed', type=int, default=None, help='Random seed (bootstrap, simulation)')

    parser = _ArgumentParser(description='Network log-ARCH volatility forecasting')
    commands = parser.add_subparsers(dest='command', required=True, parser_class=_ArgumentParser)

    ingest = commands.add_parser('ingest', parents=[common], help='Load a CSV panel')
    ingest.add_argument('csv', type=Path)
    ingest.add_argument('--layout', choices=LAYOUTS, default='wide')
    ingest.add_argument('--field', choices=('price', 'return'), default='return')
    ingest.add_argument('--out', type=Path, required=True, help='Panel artifact (JSON)')
    ingest.add_argument('--summary', type=Path, help='Summary table CSV (default: next to --out)')

    network = commands.add_parser('network', parents=[common], help='Build an edge weight matrix')
    network.add_argument('panel', type=Path)
    network.add_argument('--distance', choices=DISTANCES, required=True)
    network.add_argument('--weighting', choices=WEIGHTINGS, required=True)
    network.add_argument('--k', type=int)
    network.add_argument('--raw', action='store_true', help='Do not row-normalize inverse distances')
    network.add_argument('--zero-policy', choices=ZERO_POLICIES)
    network.add_argument('--zero-floor', type=float)
    network.add_argument('--out-dir', type=Path, required=True)

    backtest = commands.add_parser('backtest', parents=[common], help='Rolling-window forecasts')
    backtest.add_argument('panel', type=Path)
    backtest.add_argument('--models', default=ALL_MODELS, help="'all13' or comma separated ids")
    backtest.add_argument('--M', dest='window_len', type=int)
    backtest.add_argument('--refit-w', action='store_true', default=None)
    backtest.add_argument('--zero-policy', choices=ZERO_POLICIES)
    backtest.add_argument('--zero-floor', type=float)
    backtest.add_argument('--workers', type=int)
    backtest.add_argument('--out-dir', type=Path, required=True)

    report = commands.add_parser('report', parents=[common], help='Evaluate a forecast table')
    report.add_argument('forecasts', type=Path, help='forecasts.json written by backtest')
    report.add_argument('--alpha', type=float)
    report.add_argument('--B', dest='bootstrap_reps', type=int)
    report.add_argument('--block-len', type=int)
    report.add_argument('--out-dir', type=Path, required=True)

    simulate = commands.add_parser('simulate', parents=[common], help='Simulate a return panel')
    simulate.add_argument('--n', type=int, default=10)
    simulate.add_argument('--T', type=int, default=3000)
    simulate.add_argument('--rho', type=float, default=0.4, help='0 with --k 0 simulates independent stocks')
    simulate.add_argument('--k', type=int, default=3, help='Neighbours of the knn network')
    simulate.add_argument('--gamma', type=float, default=0.3)
    simulate.add_argument('--phi0', type=float, default=-5.0)
    simulate.add_argument('--out', type=Path, required=True)
    simulate.add_argument('--csv', type=Path, help='Also write the panel as a wide CSV')
    return parser


def load_config(args: argparse.Namespace) -> Config:
    """Environment, then config file, then command line flags"""
    config = Config.from_env()
    if args.config is not None:
        config = Config.from_file(args.config, base=config)
    overrides = {
        name: getattr(args, name, None)
        for name in ('seed', 'window_len', 'workers', 'alpha', 'bootstrap_reps', 'block_len', 'zero_floor')
    }
    overrides['log_level'] = args.log_level
    overrides['zero_policy'] = getattr(args, 'zero_policy', None)
    overrides['refit_w_each_step'] = getattr(args, 'refit_w', None)
    if getattr(args, 'raw', False):
        overrides['normalize_inverse'] = False
    config = config.with_overrides(**overrides)
    set_config(config)
    return config


def cmd_ingest(args: argparse.Namespace, config: Config) -> int:
    result = read_csv_panel(args.csv, args.layout, args.field)
    digest = save_artifact(result.panel, args.out)
    summary_path = args.summary or args.out.with_name(args.out.stem + '_summary.csv')
    summarize_panel(result.panel).to_csv(summary_path, float_format='%.4f')
    for ticker in result.dropped:
        logger.info("Dropped %s: not observed on the common calendar", ticker)
    print(f"panel {args.out} sha256={digest} stocks={result.panel.n} dates={result.panel.T}")
    return 0


def cmd_network(args: argparse.Namespace, config: Config) -> int:
    if args.weighting == 'knn' and args.k is None:
        raise InvalidParameter("--k is required with --weighting knn")
    panel = load_artifact(args.panel, ReturnPanel)
    volpanel = None
    if args.distance == 'logarch':
        volpanel = log_squared(panel, zero_policy_for(config))
    d = compute_distance(panel, args.distance, volpanel, config.ar_max_order, config.ar_criterion)
    w = weights_from_distance(d, args.weighting, args.k, config.normalize_inverse)

    model_id = network_model_id(args.distance, args.weighting, args.k)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    digest = save_artifact(w, args.out_dir / f"W_{model_id}.json")
    (args.out_dir / f"W_{model_id}.graphml").write_text(export_graph(w), encoding='utf-8')
    (args.out_dir / f"D_{args.distance}.csv").write_text(distance_to_csv(d), encoding='utf-8')
    print(f"{model_id} {w.label} sha256={digest}")
    return 0


def cmd_backtest(args: argparse.Namespace, config: Config) -> int:
    panel = load_artifact(args.panel, ReturnPanel)
    backtest_config = BacktestConfig.from_config(args.models, config)
    table = run_backtest(panel, backtest_config)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    table.to_frame().to_csv(args.out_dir / 'forecasts.csv', index=False)
    digest = save_artifact(table, args.out_dir / 'forecasts.json')
    print(
        f"forecasts {args.out_dir / 'forecasts.json'} sha256={digest} "
        f"models={len(table.model_ids)} stocks={len(table.tickers)} dates={len(table.dates)}"
    )
    return 0


def cmd_report(args: argparse.Namespace, config: Config) -> int:
    table = load_artifact(args.forecasts, ForecastTable)
    service = ReportService(config)
    report = service.build_report(table)
    paths = service.write_report(report, args.out_dir)
    averages = report.rmsfe.loc['Average']
    for model_id in table.model_ids:
        print(f"{model_id:>8}  RMSFE {averages[model_id]:.4f}  MAFE {report.mafe.loc['Average', model_id]:.4f}")
    for kind, result in report.mcs.items():
        print(f"MCS ({kind}): {', '.join(result.superior_set)}")
    print(f"report {paths['report']}")
    return 0


def cmd_simulate(args: argparse.Namespace, config: Config) -> int:
    spec = InnovationSpec(seed=config.seed)
    tickers = [f"S{i + 1:02d}" for i in range(args.n)]
    if args.k == 0:
        if args.rho != 0:
            raise InvalidParameter("--rho must be 0 without a network (--k 0)")
        returns = np.vstack([
            simulate_univariate(args.phi0, [args.gamma], args.T, spec=InnovationSpec(seed=config.seed + i))
            for i in range(args.n)
        ])
        panel = ReturnPanel(tickers, synthetic_dates(args.T), returns)
    else:
        # neighbours from random positions on the unit square
        positions = spec.generator().uniform(size=(args.n, 2))
        d = DistanceMatrix(squareform(pdist(positions)), 'euclidean', tickers)
        w: EdgeWeightMatrix = weights_knn(d, args.k)
        panel = simulate_network(
            np.full(args.n, args.phi0), args.rho, np.full(args.n, args.gamma), w, args.T,
            spec=InnovationSpec(seed=config.seed + 1),
        )
    digest = save_artifact(panel, args.out)
    if args.csv is not None:
        frame = panel.to_frame()
        frame.index.name = 'date'
        frame.to_csv(args.csv)
    print(f"panel {args.out} sha256={digest} stocks={panel.n} dates={panel.T}")
    return 0


COMMANDS = {
    'ingest': cmd_ingest,
    'network': cmd_network,
    'backtest': cmd_backtest,
    'report': cmd_report,
    'simulate': cmd_simulate,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand

    Returns:
        0 on success, 2 for usage errors, 3 for data errors, 4 for numeric failures
    """
    try:
        args = build_parser().parse_args(argv)
        config = load_config(args)
    except NetworkArchError as e:
        logging.basicConfig(level=logging.ERROR, format=LOG_FORMAT)
        logger.error("%s", e)
        return e.exit_code

    logging.basicConfig(level=getattr(logging, config.log_level.upper(), logging.INFO), format=LOG_FORMAT)
    try:
        return COMMANDS[args.command](args, config)
    except NetworkArchError as e:
        logger.error("%s failed: %s", args.command, e)
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
