# core/errors.py
# ------------------------------------------------------------
# Exception hierarchy. Every library error derives from MaxBoundError;
# the value errors also derive from ValueError so plain
# ``except ValueError`` callers keep working.
#
# Exit codes used by the CLI (see maxbound_cli.py):
#   DomainError and subclasses, ResourceError  -> 2
#   NumericError                               -> 3
#
from __future__ import annotations

from typing import Optional


class MaxBoundError(Exception):
    """Base class for all errors raised by the library."""


class DomainError(MaxBoundError, ValueError):
    """An argument lies outside the domain of the operation."""


class GateError(DomainError):
    """
    A bound's validity gate does not hold, e.g. N + L_alpha >= 6.

    smallest_n : least n that passes the gate at the requested alpha, if known
    largest_k  : largest subsampling stride that still passes, if relevant
    """

    def __init__(
        self,
        message: str,
        *,
        smallest_n: Optional[int] = None,
        largest_k: Optional[int] = None,
    ) -> None:
        super().__init__(message)
        self.smallest_n = smallest_n
        self.largest_k = largest_k


class MatrixError(DomainError):
    """Malformed, asymmetric or non positive definite covariance input."""


class DecompositionError(MatrixError):
    """
    Triangular factorization failed.

    pivot    : 1-based position (in the permuted order) of the failing pivot
    variable : 0-based index of that variable in the original matrix
    """

    def __init__(self, message: str, *, pivot: int, variable: int) -> None:
        super().__init__(message)
        self.pivot = pivot
        self.variable = variable


class DimensionError(DomainError):
    """Sizes of certificate, matrix or plan do not match."""


class ResourceError(MaxBoundError, ValueError):
    """A configured size cap would be exceeded."""


class NumericError(MaxBoundError, ArithmeticError):
    """Convergence failure or non-finite intermediate value."""


__all__ = [
    "MaxBoundError",
    "DomainError",
    "GateError",
    "MatrixError",
    "DecompositionError",
    "DimensionError",
    "ResourceError",
    "NumericError",
]
