"""Exception and warning types shared across the package."""


class MomentFitError(Exception):
    """Base class for all momentfit errors."""


class InputError(MomentFitError):
    """Malformed user input (files, flags, inconsistent dimensions)."""


class DegreeTooLow(MomentFitError):
    """A moment vector does not reach the degree required by an operation."""


class DegreeMismatch(MomentFitError):
    """Fit degree is incompatible with the generator degrees of the domain."""


class SingularMomentMatrix(MomentFitError):
    """Moment matrix of the reference measure is numerically singular."""

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class CholeskyFailure(MomentFitError):
    """Cholesky factorization failed on a matrix required to be PSD."""


class GridMismatch(MomentFitError):
    """Two rasters do not share the same evaluation grid."""


class ConditioningWarning(UserWarning):
    """High-degree monomial coefficient vectors carry little usable precision."""
