"""Density reconstruction from truncated moment vectors.

Given finitely many moments of an unknown nonnegative density, fit a
polynomial minimizing the mean squared error: unconstrained (a linear solve,
or no solve at all in the box-orthonormal Legendre basis), or constrained to
be nonnegative via localizing-matrix or Putinar-certificate semidefinite
programs solved by the in-repo interior-point solver.  A maximum-entropy
baseline and shape-recovery tooling round out the toolbox.
"""

__version__ = "0.1.0"

from .assess import (
    ErrorReport,
    EvaluationGrid,
    default_grid,
    error_metrics,
    superlevel_set,
    symmetric_difference,
)
from .bases import (
    BASES,
    CHEBYSHEV,
    LEGENDRE,
    MONOMIAL,
    Polynomial,
    basis_change,
    orthonormal_basis,
    orthonormal_gram,
)
from .confit import PutinarCertificate, fit_localizing, fit_putinar
from .errors import (
    CholeskyFailure,
    ConditioningWarning,
    DegreeMismatch,
    DegreeTooLow,
    GridMismatch,
    InputError,
    MomentFitError,
    SingularMomentMatrix,
)
from .indices import enumerate_indices, index_positions, s_dim
from .l2fit import FitReport, fit_regularized, fit_unconstrained, l2_distance_shifted
from .maxent import ExpPolyDensity, maxent_fit
from .moments import (
    MomentVector,
    SemialgebraicDomain,
    SymmetricMatrix,
    box_moment,
    lebesgue_moments,
    localizing_matrix,
    moment_matrix,
    quadrature_moments,
    riesz,
)
from .sdp import SdpBlock, SdpProblem, SdpSolution, quadratic_to_sdp, solve
