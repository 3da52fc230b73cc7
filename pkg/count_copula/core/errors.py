EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


class CountCopulaError(Exception):
    exit_code = EXIT_FAILURE


class ConfigError(CountCopulaError, ValueError):
    exit_code = EXIT_CONFIG


class ParameterDomainError(CountCopulaError, ValueError):
    exit_code = EXIT_CONFIG


class DataError(CountCopulaError):
    exit_code = EXIT_DATA


class NumericalError(CountCopulaError, ArithmeticError):
    exit_code = EXIT_NUMERICAL


class HeavyTailError(NumericalError):
    """The pmf grid hit its hard cap before the tail underflowed."""


class DegenerateMarginalError(NumericalError):
    """The marginal has (numerically) zero variance."""


class LinkRangeError(NumericalError, ValueError):
    """A count correlation lies outside the achievable range (L(-1), 1)."""


class DefinitenessError(NumericalError):
    """A covariance matrix or sequence is not positive definite."""


class RankError(NumericalError):
    """A Toeplitz system is singular."""


class ImpossibleDataError(NumericalError):
    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"observation at t={t} has zero probability under the model")
