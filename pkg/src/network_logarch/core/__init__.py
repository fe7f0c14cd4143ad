"""
Core module for network log-ARCH forecasting
Contains configuration, error definitions, domain types and serialization.
"""

from network_logarch.core.config import Config, get_config, reset_config, set_config
from network_logarch.core.errors import (
    AllZeroSeries,
    BacktestStepError,
    BadK,
    BootstrapDegenerate,
    CoincidentSeries,
    ConfigurationError,
    DataError,
    DegenerateSeries,
    DuplicateKey,
    EmptyPanel,
    InsufficientObservations,
    InvalidParameter,
    InvariantViolation,
    NetworkArchError,
    NonMonotoneDates,
    Nonstationary,
    NumericError,
    Overflow,
    ParseError,
    RankDeficient,
    SingularCovariance,
    SingularDesign,
    SingularMoment,
    SingularRegression,
    SingularSystem,
    UnreadableArtifact,
    UnstableRho,
    UsageError,
    ZeroVariance,
)
from network_logarch.core.serialization import content_hash, from_json, load_artifact, save_artifact, to_json
from network_logarch.core.types import (
    DistanceMatrix,
    EdgeWeightMatrix,
    ForecastTable,
    LogVolPanel,
    NetworkFit,
    ReturnPanel,
    UnivariateFit,
    ZeroPolicy,
)
from network_logarch.core.validation import PanelValidation, validate_panel

__all__ = [
    'Config', 'get_config', 'reset_config', 'set_config',
    'NetworkArchError', 'UsageError', 'DataError', 'NumericError',
    'ConfigurationError', 'InvalidParameter', 'BadK',
    'ParseError', 'DuplicateKey', 'EmptyPanel', 'NonMonotoneDates', 'AllZeroSeries',
    'DegenerateSeries', 'CoincidentSeries', 'InsufficientObservations', 'InvariantViolation',
    'UnreadableArtifact',
    'SingularDesign', 'SingularRegression', 'SingularMoment', 'UnstableRho', 'SingularSystem',
    'Nonstationary', 'ZeroVariance', 'BootstrapDegenerate', 'SingularCovariance',
    'RankDeficient', 'Overflow', 'BacktestStepError',
    'ReturnPanel', 'ZeroPolicy', 'LogVolPanel', 'DistanceMatrix', 'EdgeWeightMatrix',
    'UnivariateFit', 'NetworkFit', 'ForecastTable',
    'PanelValidation', 'validate_panel',
    'to_json', 'from_json', 'content_hash', 'save_artifact', 'load_artifact',
]
