"""Exception hierarchy shared across the package."""


class HeavyCombError(Exception):
    """Base class for all package-specific errors."""


class DomainError(HeavyCombError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class InfiniteQuantileError(DomainError):
    """Quantile requested at 0 or 1 where the result is infinite."""


class BracketError(HeavyCombError, ValueError):
    """Root finding was given a bracket without a sign change."""


class ConvergenceError(HeavyCombError, RuntimeError):
    """An iterative routine failed to converge within its iteration budget."""


class MethodMisuseError(HeavyCombError, ValueError):
    """A combination method was applied outside its validity conditions."""


class ShapeError(HeavyCombError, ValueError):
    """Paired inputs have incompatible lengths."""


class CapacityError(HeavyCombError, ValueError):
    """Problem size exceeds a hard resource limit (e.g. 2^n subset scans)."""


class InsufficientEventsError(HeavyCombError, RuntimeError):
    """A Monte Carlo ratio has an empty denominator.

    Carries the raw event counts so callers can report or retry with more
    replications.
    """

    def __init__(self, message, counts=None):
        super().__init__(message)
        self.counts = dict(counts or {})


class ValidationError(HeavyCombError, ValueError):
    """Malformed user input (CLI files, p-value ranges)."""


class ConfigError(HeavyCombError, ValueError):
    """Invalid experiment configuration."""
