"""Exception hierarchy shared by all modules."""


class RKFError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(RKFError, ValueError):
    pass


class DomainError(RKFError, ValueError):
    pass


class InvalidModelError(RKFError, ValueError):
    pass


class NumericalFailure(RKFError, ArithmeticError):
    pass


class ConvergenceError(NumericalFailure):
    """Fixed-point iteration did not reach tolerance.

    ``residual`` holds the last iterate gap so callers can judge how close it got.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class PreconditionError(RKFError, ValueError):
    pass


class InapplicableError(RKFError, ValueError):
    """A bound was requested whose constants are undefined for this model."""


class ConfigError(RKFError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
