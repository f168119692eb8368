"""Exception hierarchy.

Input problems (bad shapes, non-finite entries, missing data) raise
:class:`ValidationError`; failures that come from the numbers themselves
(non-positive-definite matrices, singular systems, disagreeing cross-checks)
raise a :class:`NumericalError` subclass.
"""


class RidgeEqualityError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(RidgeEqualityError, ValueError):
    """Inputs are malformed or violate a documented precondition."""


class NumericalError(RidgeEqualityError, ArithmeticError):
    """A numerical property required by an operation does not hold."""


class NotPositiveDefiniteError(NumericalError):
    """A matrix that must be symmetric positive definite is not.

    ``min_eigenvalue`` carries the smallest eigenvalue of the symmetric part
    when it was computed, otherwise ``None``.
    """

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class SingularSystemError(NumericalError):
    """A linear system could not be solved reliably."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ConsistencyError(NumericalError):
    """Two independent routes to the same verdict disagree."""
