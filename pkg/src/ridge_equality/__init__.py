"""Equality, construction and classification of general ridge estimators
in linear models with a general positive definite error dispersion."""

__version__ = "0.1.0"

from .classify import (
    DiscrepancyReport,
    PerturbationSpec,
    classify_ranks,
    epsilon_bound,
    exact_discrepancy,
    first_order_expansion,
    mc_oracle,
)
from .equivalence import (
    EqualityCertificate,
    GammaSolution,
    RssCertificate,
    build_equalizing_dispersion,
    check_estimator_equality,
    check_rss_equality,
    solve_gamma,
)
from .errors import (
    ConsistencyError,
    NotPositiveDefiniteError,
    NumericalError,
    RidgeEqualityError,
    SingularSystemError,
    ValidationError,
)
from .estimators import EstimatorMoments, estimator_moments, general_ridge_estimate, grss
from .linalg import DEFAULT_TOLERANCES, Tolerances, null_space_basis, pinv, rank_with_tol, subspace_tests, sym_sqrt_pair
from .model import Design, ModelTruth, RidgeSpec, validate_design
from .structure import (
    DispersionBlocks,
    assemble_dispersion,
    decompose_dispersion,
    is_rao_form,
    rao_inverse,
    required_delta_det,
)
