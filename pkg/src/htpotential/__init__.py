"""Exact horizontal calculus on Heisenberg-type groups and numerical
verification that Riesz potentials of nonnegative sources are
p-superharmonic or p-subharmonic in the predicted parameter ranges."""

from .calculus import (
    HorizontalJet,
    Primitives,
    ScalarField,
    SingularityError,
    analytic_jet,
    commutator_defect,
    fd_jet,
    kernel_field,
    primitives,
)
from .groups import (
    GroupPoint,
    GroupSpec,
    GroupValidationError,
    HTypeReport,
    build_group,
    custom_group,
    dilate,
    gauge_norm,
    heisenberg,
    identity,
    inverse,
    j_apply,
    multiply,
    point,
    quaternionic,
    validate_htype,
)
from .operators import (
    FundamentalSolutionParams,
    OperatorSelector,
    apply_operator,
    gamma_p,
    gauge_ball_volume,
    harmonicity_residuals,
    infinity_laplacian,
    omega_sigma,
    p_laplacian,
    sub_laplacian,
)
from .quadrature import (
    Box,
    IntegralResult,
    QuadratureConfig,
    QuadratureNotConverged,
    integrate_adaptive,
    integrate_gauge_ball,
)
from .riesz import (
    BracketBreakdown,
    Bump,
    Density,
    DiscreteMeasure,
    TheoremCase,
    VerificationReport,
    bracket_terms,
    field_k,
    plaplacian_two_ways,
    riesz_jet,
    riesz_value,
    verify_linear_potential,
    verify_theorem,
)

__version__ = "0.1.0"
