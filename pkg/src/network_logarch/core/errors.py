"""
Custom exceptions for network log-ARCH forecasting.

All exceptions inherit from NetworkArchError to provide a common base
for error handling throughout the library. Each family carries the exit
code the command-line front-end reports for it.
"""

from typing import Optional


class NetworkArchError(Exception):
    """
    Base exception for all library errors.

    All custom exceptions in this module inherit from this class,
    allowing for unified error handling.
    """
    exit_code: int = 1


class UsageError(NetworkArchError):
    """
    Raised when the caller supplied an invalid argument or configuration.

    This includes cases where:
    - A parameter is outside its admissible range
    - A configuration file contains unknown keys
    - A command is invoked on an empty artifact
    """
    exit_code = 2


class ConfigurationError(UsageError):
    """Raised when configuration values are missing or malformed."""
    pass


class InvalidParameter(UsageError):
    """Raised when a numeric or categorical argument is out of range."""
    pass


class BadK(UsageError):
    """Raised when the neighbour count k is not in 1..n-1."""
    pass


class DataError(NetworkArchError):
    """
    Base exception for input data problems.

    All data-specific errors inherit from this class.
    """
    exit_code = 3


class ParseError(DataError):
    """
    Raised when a CSV cell or row cannot be parsed.

    Carries the offending line number of the file (header is line 1) and column name.
    """

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.row = row
        self.column = column


class DuplicateKey(DataError):
    """Raised when a (date, ticker) pair appears more than once."""
    pass


class EmptyPanel(DataError):
    """Raised when fewer than two stocks survive panel validation."""
    pass


class NonMonotoneDates(DataError):
    """Raised when dates cannot be put in a strict order."""
    pass


class AllZeroSeries(DataError):
    """Raised when a stock has no nonzero return to derive a floor from."""
    pass


class DegenerateSeries(DataError):
    """Raised when a stock series has zero sample variance."""
    pass


class CoincidentSeries(DataError):
    """Raised when two distinct stocks are at distance zero."""
    pass


class InsufficientObservations(DataError):
    """Raised when a sample is too short for the requested computation."""
    pass


class InvariantViolation(DataError):
    """Raised when a domain object fails its construction checks."""
    pass


class UnreadableArtifact(DataError):
    """Raised when an artifact file is missing or cannot be read."""
    pass


class NumericError(NetworkArchError):
    """
    Base exception for numerical failures during estimation or evaluation.

    Indicates that the data were well formed but the requested computation
    has no (finite, unique) answer.
    """
    exit_code = 4


class SingularDesign(NumericError):
    """Raised when an OLS design matrix is rank deficient."""
    pass


class SingularRegression(NumericError):
    """Raised when an AR regression used for a distance is rank deficient."""
    pass


class SingularMoment(NumericError):
    """Raised when GMM instruments are collinear."""
    pass


class UnstableRho(NumericError):
    """Raised when the estimated network parameter leaves the stability region."""
    pass


class SingularSystem(NumericError):
    """Raised when I - rho W cannot be solved."""
    pass


class Nonstationary(NumericError):
    """Raised when simulation parameters imply a nonstationary process."""
    pass


class ZeroVariance(NumericError):
    """Raised when a loss differential is identically zero."""
    pass


class BootstrapDegenerate(NumericError):
    """Raised when every pairwise loss differential is constant."""
    pass


class SingularCovariance(NumericError):
    """Raised when the forecast error covariance cannot be inverted."""
    pass


class RankDeficient(NumericError):
    """Raised when a constrained least squares design is rank deficient."""
    pass


class Overflow(NumericError):
    """Raised when an exponential correction is not finite."""
    pass


class BacktestStepError(NetworkArchError):
    """
    Raised when a model fails inside the rolling backtest.

    Wraps the original error together with the model id and the step index,
    and reports the exit code of the original error.
    """

    def __init__(self, model_id: str, step: int, cause: NetworkArchError):
        super().__init__(f"model {model_id} failed at step {step}: {cause}")
        self.model_id = model_id
        self.step = step
        self.cause = cause
        self.exit_code = cause.exit_code
