"""Game-theoretic Kalman filter with worst-case loss certification."""
from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    DomainError,
    InapplicableError,
    InvalidModelError,
    NumericalFailure,
    PreconditionError,
    RKFError,
)
from .kernels import BACKEND
from .model import StructureReport, SystemModel, random_stable_system, validate

__all__ = [
    "BACKEND",
    "ConfigError",
    "ConvergenceError",
    "DimensionError",
    "DomainError",
    "InapplicableError",
    "InvalidModelError",
    "NumericalFailure",
    "PreconditionError",
    "RKFError",
    "StructureReport",
    "SystemModel",
    "random_stable_system",
    "validate",
]
__version__ = "0.1.0"
