"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class GossipSearchError(Exception):
    exit_code = 1


class ConfigError(GossipSearchError, ValueError):
    """Parameter outside its domain."""

    exit_code = 2


class DomainError(ConfigError):
    """Formula evaluated outside the region where it is defined."""


class NumericalInstabilityError(GossipSearchError, ArithmeticError):
    exit_code = 3


class TruncationError(NumericalInstabilityError):
    """The survival probability did not drop below epsilon within the round cap."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SizeBudgetError(GossipSearchError):
    exit_code = 4


class FitError(GossipSearchError, ValueError):
    exit_code = 2


class ComparisonError(GossipSearchError, ValueError):
    exit_code = 2


class AccuracyUndefinedError(GossipSearchError, ZeroDivisionError):
    exit_code = 3
