"""Numerical experiments around Brody reparametrization and Ahlfors currents."""

from .errors import (
    BrodyLabError,
    DegeneracyError,
    DomainError,
    InvariantViolation,
    NumericalError,
    PreconditionError,
)

__version__ = "0.1.0"

__all__ = [
    "BrodyLabError",
    "DegeneracyError",
    "DomainError",
    "InvariantViolation",
    "NumericalError",
    "PreconditionError",
]
