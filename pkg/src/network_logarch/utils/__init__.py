"""
Utilities module for network log-ARCH forecasting
Contains CSV ingestion, log-squared transforms and simulators.
"""

from network_logarch.utils.data_loader import (
    load_csv,
    log_squared,
    read_csv_panel,
    summarize_panel,
)
from network_logarch.utils.simulate import (
    InnovationSpec,
    simulate_network,
    simulate_univariate,
)

__all__ = [
    'load_csv',
    'log_squared',
    'read_csv_panel',
    'summarize_panel',
    'InnovationSpec',
    'simulate_network',
    'simulate_univariate',
]
