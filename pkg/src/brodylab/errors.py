"""Exception hierarchy.

Every error carries the module and operation that raised it; the CLI maps
the three families onto exit statuses 2 (precondition), 3 (numerical) and
4 (invariant violation).
"""

from __future__ import annotations


class BrodyLabError(Exception):
    exit_code = 1

    def __init__(self, where: str, message: str):
        self.where = where
        self.message = message
        super().__init__(f"{where}: {message}")


class PreconditionError(BrodyLabError, ValueError):
    exit_code = 2


class DomainError(PreconditionError):
    """A point or radius lies outside the region an operation accepts."""


class DegeneracyError(PreconditionError):
    """Homogeneous coordinates vanish, or a configuration leaves general position."""


class NumericalError(BrodyLabError, ArithmeticError):
    exit_code = 3


class InvariantViolation(BrodyLabError, AssertionError):
    exit_code = 4
