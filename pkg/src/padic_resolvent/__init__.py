"""Exact p-adic resolvent calculus and equi-continuity checks for discrete semigroups.

The library computes over Q_p with two cross-checked backends (exact
rationals and capped base-p digits), evaluates resolvents by certified
truncated Neumann series and by exact linear solve, and decides
equi-continuity of power semigroups and of their resolvent criterion
families against finite weighted-seminorm models.
"""

__version__ = "0.1.0"

from .criteria import (
    CheckConfig,
    OperatorSystem,
    VerdictReport,
    default_lambda_grid,
    derivative_identity_residual,
    increment_power,
    increment_series_residual,
    make_system,
    power_reconstruction_residual,
    regularized_power,
    semigroup_verdict,
    small_lambda_probe,
)
from .errors import (
    DomainError,
    HypothesisViolationError,
    InternalConsistencyError,
    InvalidInputError,
    OutOfRadiusError,
    PadicError,
    SingularElementError,
    SingularMatrixError,
    SpecParseError,
)
from .harness import (
    ParsedSpec,
    ReportDocument,
    generate_instance,
    instance_spec,
    parse_spec,
    run_and_report,
    serialize_spec,
)
from .linalg import (
    EquiContinuityVerdict,
    PadicMatrix,
    SeminormFamily,
    char_poly,
    char_poly_minors,
    equicontinuity_check,
    mat_pow,
    newton_slopes,
    norm_exponent,
    power_bounded_oracle,
    power_norm_profile,
    seminorm_eval,
)
from .resolvent import (
    ResolventValue,
    convergence_radius_exponent,
    exact_resolvent,
    neumann_resolvent,
    recentered_resolvent,
    resolvent_derivative,
)
from .scalar import (
    NEG_INF,
    POS_INF,
    PadicScalar,
    PrecisionBudget,
    binomial_valuation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
