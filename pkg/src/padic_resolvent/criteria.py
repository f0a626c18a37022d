"""Equi-continuity criteria for discrete semigroups (A^n) via the resolvent.

The two criterion families evaluated on a punctured disk 0 < |lambda| < p^r:

  regularized family   (R(lambda,A) - I)^n R(lambda,A) / (omega lambda)^n
  increment family     (R(lambda,A) - I)^n / (omega lambda)^n

Each is computed by two exact routes (the displayed form, and the commuted
closed form A^n R^(n+1) resp. (A R)^n) which must agree; equi-continuity of
the power semigroup {(A/omega)^n} is checked against the same seminorm
family and, for oracle-bounded operators, certified by the series bound
||family member|| <= max_k ||(A/omega)^k||.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    DomainError,
    HypothesisViolationError,
    InternalConsistencyError,
    InvalidInputError,
)
from .linalg import (
    EquiContinuityVerdict,
    PadicMatrix,
    SeminormFamily,
    equicontinuity_check,
    mat_pow,
    norm_exponent,
    power_bounded_oracle,
    power_norm_profile,
)
from .resolvent import (
    convergence_radius_exponent,
    exact_resolvent,
    subadditive_tail_bound,
)
from .scalar import (
    CAPPED,
    EXACT,
    Exponent,
    NEG_INF,
    PadicScalar,
    PrecisionBudget,
)

STABILITY_HORIZON = 500


@dataclass(frozen=True)
class OperatorSystem:
    """An operator with its scaling element, declared domain and seminorms."""

    matrix: PadicMatrix
    omega: PadicScalar
    declared_radius_exponent: int
    seminorms: SeminormFamily


def make_system(matrix: PadicMatrix, omega: PadicScalar | None = None,
                declared_radius_exponent: int | None = None,
                seminorms: SeminormFamily | None = None,
                radius_horizon: int | None = None) -> OperatorSystem:
    """Validate and build an OperatorSystem.

    The declared radius must be certifiable from the power growth of the
    matrix; for omega with |omega| != 1 the scaled criteria only make sense
    on the disk of radius 1/|omega|, so the declared exponent is pinned to
    -|omega|-exponent.
    """
    if omega is None:
        omega = PadicScalar.one(matrix.prime, matrix.backend, matrix._working_digits())
    else:
        omega = matrix._coerce_scalar(omega)
    if omega.is_zero:
        raise InvalidInputError("omega must be nonzero")
    if seminorms is None:
        seminorms = SeminormFamily.sup_norm(matrix.dim)
    if seminorms.dim != matrix.dim:
        raise InvalidInputError("seminorm family dimension mismatch")
    if not seminorms.is_hausdorff():
        raise InvalidInputError("seminorm family must be Hausdorff")
    certified = convergence_radius_exponent(matrix, radius_horizon)
    scaled_radius = -omega.abs_exponent
    if declared_radius_exponent is None:
        if omega.abs_exponent != 0:
            declared_radius_exponent = scaled_radius
        else:
            declared_radius_exponent = 0 if certified >= 0 else int(certified)
    if declared_radius_exponent > certified:
        raise HypothesisViolationError(
            f"hypothesis 'resolvent analytic on the disk |lambda| < p^"
            f"{declared_radius_exponent}' is not certified: the power growth "
            f"of the matrix only certifies radius exponent {certified}")
    if omega.abs_exponent != 0 and declared_radius_exponent != scaled_radius:
        raise HypothesisViolationError(
            f"scaled systems must declare the radius exponent -|omega|-exponent "
            f"= {scaled_radius}, got {declared_radius_exponent}")
    return OperatorSystem(matrix, omega, int(declared_radius_exponent), seminorms)


@dataclass(frozen=True)
class CheckConfig:
    """Sample grid and horizons for a verdict run."""

    lambda_samples: tuple[PadicScalar, ...]
    n_max: int = 12
    k_max: int = 200
    budget: PrecisionBudget = field(default_factory=PrecisionBudget)
    scaling_budget: int = 40


def default_lambda_grid(system: OperatorSystem, depth: int = 3) -> tuple[PadicScalar, ...]:
    """Samples u * p^m with u in {1, 1+p}, m starting just inside the domain.

    Sampling never leaves |lambda| <= 1/p even when the declared radius
    allows larger values.
    """
    m0 = max(1, 1 - system.declared_radius_exponent)
    p = system.matrix.prime
    backend = system.matrix.backend
    digits = system.matrix._working_digits()
    grid = []
    for m in range(m0, m0 + depth):
        for u in (1, 1 + p):
            grid.append(PadicScalar.from_fraction(
                Fraction(u) * Fraction(p) ** m, p, backend, digits))
    return tuple(grid)


def validate_config(system: OperatorSystem, config: CheckConfig) -> None:
    if not config.lambda_samples:
        raise InvalidInputError("lambda sample grid is empty")
    r = system.declared_radius_exponent
    for lv in config.lambda_samples:
        lv = system.matrix._coerce_scalar(lv)
        if lv.is_zero:
            raise InvalidInputError("lambda samples must be nonzero")
        if lv.abs_exponent > r - 1:
            raise InvalidInputError(
                f"sample |lambda| = p^{lv.abs_exponent} is outside the punctured "
                f"disk 0 < |lambda| < p^{r}")
    if config.n_max < 1:
        raise InvalidInputError("n_max must be >= 1")
    if config.k_max < system.matrix.dim:
        raise InvalidInputError("k_max must be at least the matrix dimension")
    if config.scaling_budget < 0:
        raise InvalidInputError("scaling budget must be >= 0")


# -- dual-route criterion values ------------------------------------------


def _dual_route_guard(a: PadicMatrix, route1: PadicMatrix, route2: PadicMatrix,
                      what: str) -> None:
    if a.backend == EXACT:
        if route1 != route2:
            raise InternalConsistencyError(f"{what}: exact routes disagree")
        return
    digits = a._working_digits()
    gap = norm_exponent(route1 - route2)
    if gap > -(digits // 2):
        raise InternalConsistencyError(
            f"{what}: capped routes differ by p^{gap}, precision exhausted")


def regularized_power(a: PadicMatrix, lam: PadicScalar, n: int,
                      omega: PadicScalar | None = None) -> PadicMatrix:
    """(R - I)^n R / (omega lambda)^n, cross-checked against (A/omega)^n R^(n+1)."""
    if n < 0:
        raise InvalidInputError("n must be >= 0")
    lam = a._coerce_scalar(lam)
    if lam.is_zero:
        raise InvalidInputError("the criterion families exclude lambda = 0")
    r = exact_resolvent(a, lam)
    ident = PadicMatrix.identity(a.dim, a.prime, a.backend, a._working_digits())
    scale = lam if omega is None else lam * a._coerce_scalar(omega)
    route1 = (mat_pow(r - ident, n) @ r).scale(scale ** (-n))
    route2 = (mat_pow(a, n) @ mat_pow(r, n + 1)).scale(
        (a._coerce_scalar(omega) if omega is not None else
         PadicScalar.one(a.prime, a.backend, a._working_digits())) ** (-n))
    _dual_route_guard(a, route1, route2, "regularized criterion value")
    return route1


def increment_power(a: PadicMatrix, lam: PadicScalar, n: int,
                    omega: PadicScalar | None = None) -> PadicMatrix:
    """(R - I)^n / (omega lambda)^n for n >= 1, cross-checked against (A R / omega)^n."""
    if n < 1:
        raise InvalidInputError("the increment family starts at n = 1")
    lam = a._coerce_scalar(lam)
    if lam.is_zero:
        raise InvalidInputError("the criterion families exclude lambda = 0")
    r = exact_resolvent(a, lam)
    ident = PadicMatrix.identity(a.dim, a.prime, a.backend, a._working_digits())
    scale = lam if omega is None else lam * a._coerce_scalar(omega)
    route1 = mat_pow(r - ident, n).scale(scale ** (-n))
    omega_scalar = (a._coerce_scalar(omega) if omega is not None else
                    PadicScalar.one(a.prime, a.backend, a._working_digits()))
    route2 = mat_pow(a @ r, n).scale(omega_scalar ** (-n))
    _dual_route_guard(a, route1, route2, "increment criterion value")
    return route1


# -- identity residuals ------------------------------------------------------


def derivative_identity_residual(a: PadicMatrix, lam: PadicScalar, n: int,
                                 budget: PrecisionBudget | None = None) -> Exponent:
    """||R^(n) - n! (R - I)^n R / lambda^n|| as an exponent.

    Both sides are expressed through the exact solve: the left side uses the
    closed form R^(n) = n! A^n R^(n+1) obtained by differentiating the
    resolvent directly, so on the rational backend the residual of the
    identity is exactly zero.  (The series route for R^(n) is certified
    separately against this closed form.)
    """
    if n < 0:
        raise InvalidInputError("n must be >= 0")
    lam = a._coerce_scalar(lam)
    if lam.is_zero:
        raise InvalidInputError("the identity divides by lambda^n")
    r = exact_resolvent(a, lam)
    ident = PadicMatrix.identity(a.dim, a.prime, a.backend, a._working_digits())
    fact = a._coerce_scalar(math.factorial(n))
    lhs = (mat_pow(a, n) @ mat_pow(r, n + 1)).scale(fact)
    rhs = (mat_pow(r - ident, n) @ r).scale(fact * lam ** (-n))
    residual = norm_exponent(lhs - rhs)
    if budget is not None and a.backend == CAPPED and residual > -(budget.digits // 2):
        raise InternalConsistencyError(
            f"derivative identity residual p^{residual} signals precision exhaustion")
    return residual


def increment_series_residual(a: PadicMatrix, lam: PadicScalar, n: int, k_trunc: int,
                              budget: PrecisionBudget) -> Exponent:
    """Residual of (R - I)^(n+1) against sum_{j=n..K} C(j,n) (lambda A)^(j+1).

    The tail over j > K is certified from the subadditive power growth of
    lambda A (binomial coefficients have size <= 1); a tail above the budget
    tolerance raises DomainError.
    """
    if n < 0 or k_trunc < n:
        raise InvalidInputError("need 0 <= n <= k_trunc")
    lam = a._coerce_scalar(lam)
    step = a.scale(lam)
    power = PadicMatrix.identity(a.dim, a.prime, a.backend, a._working_digits())
    acc = PadicMatrix.zeros(a.dim, a.prime, a.backend, a._working_digits())
    exps: list[Exponent] = [0]
    terminated = False
    for j in range(0, k_trunc + 1):
        power = power @ step  # now (lambda A)^(j+1)
        if j >= n:
            acc = acc + power.scale(a._coerce_scalar(math.comb(j, n)))
        exps.append(norm_exponent(power))
        if power.is_zero() and a.backend == EXACT:
            terminated = True
            break
    if terminated:
        tail: Exponent = NEG_INF
    else:
        tail = subadditive_tail_bound(exps, k_trunc + 1)
        if tail > budget.tolerance_exponent:
            raise DomainError(
                f"series tail p^{tail} not below tolerance p^{budget.tolerance_exponent}; "
                f"increase the truncation order")
    r = exact_resolvent(a, lam)
    ident = PadicMatrix.identity(a.dim, a.prime, a.backend, a._working_digits())
    closed = mat_pow(r - ident, n + 1)
    return norm_exponent(closed - acc)


def power_reconstruction_residual(a: PadicMatrix, lam: PadicScalar, k: int) -> Exponent:
    """||A^k - (I - lambda A)^(k+1) S_k(lambda)|| with S_k the regularized value."""
    if k < 0:
        raise InvalidInputError("k must be >= 0")
    lam = a._coerce_scalar(lam)
    s_k = regularized_power(a, lam, k)
    ident = PadicMatrix.identity(a.dim, a.prime, a.backend, a._working_digits())
    factor = mat_pow(ident - a.scale(lam), k + 1)
    return norm_exponent(factor @ s_k - mat_pow(a, k))


def small_lambda_probe(a: PadicMatrix, k: int, m_values: Sequence[int]) -> list[Exponent]:
    """For lambda = p^m, the max norm over the reconstruction summands.

    Returns M(m) = max_{0<=j<=k+1} ||(lambda A)^j S_k(lambda)||-exponent; as m
    grows this stabilizes at ||A^k||, making the lambda -> 0 limit behind
    the criterion a checkable numerical statement.
    """
    if any(m2 <= m1 for m1, m2 in zip(m_values, m_values[1:])):
        raise InvalidInputError("m values must be strictly increasing")
    out: list[Exponent] = []
    digits = a._working_digits()
    for m in m_values:
        lam = PadicScalar.from_fraction(
            Fraction(a.prime) ** m, a.prime, a.backend, digits)
        s_k = regularized_power(a, lam, k)
        step = a.scale(lam)
        term = s_k
        best = norm_exponent(term)
        for _ in range(k + 1):
            term = step @ term
            best = max(best, norm_exponent(term))
        out.append(best)
    return out


# -- the full verdict ---------------------------------------------------------


@dataclass(frozen=True)
class GridEntry:
    lambda_repr: str
    n: int
    norm_exponent: Exponent


@dataclass(frozen=True)
class ResidualRecord:
    check: str
    lambda_repr: str
    order: int
    exponent: Exponent
    passed: bool


@dataclass(frozen=True)
class VerdictReport:
    """Everything semigroup_verdict measured, plus the agreement flag."""

    oracle_verdict: str
    powers_verdict: EquiContinuityVerdict
    regularized_verdict: EquiContinuityVerdict
    increment_verdict: EquiContinuityVerdict
    powers_norms: tuple[tuple[int, Exponent], ...]
    regularized_grid: tuple[GridEntry, ...]
    increment_grid: tuple[GridEntry, ...]
    residuals: tuple[ResidualRecord, ...]
    bound_constant_exponent: Exponent | None
    bound_stable: bool | None
    forward_bound_holds: bool | None
    agreement: bool
    errors: tuple[str, ...]

    @property
    def residuals_pass(self) -> bool:
        return all(rec.passed for rec in self.residuals)

    @property
    def clean(self) -> bool:
        certified_ok = self.forward_bound_holds is not False and self.bound_stable is not False
        return (self.agreement and self.residuals_pass and certified_ok
                and not self.errors)


def _lambda_repr(lam: PadicScalar) -> str:
    return str(lam.lift_exact().to_fraction())


def semigroup_verdict(system: OperatorSystem, config: CheckConfig) -> VerdictReport:
    """Run the power, regularized-family and increment-family checks.

    Check errors are recorded in the report rather than aborting the run;
    validation errors on the inputs still raise.
    """
    validate_config(system, config)
    a = system.matrix
    p = a.prime
    digits = a._working_digits()
    ident = PadicMatrix.identity(a.dim, p, a.backend, digits)
    omega = system.omega
    scaled = omega.abs_exponent != 0 or omega.lift_exact().to_fraction() != 1
    b = a.scale(omega.invert()) if scaled else a

    errors: list[str] = []

    # (a) the power semigroup of B = A/omega
    powers = [ident]
    for _ in range(config.n_max):
        powers.append(powers[-1] @ b)
    powers_norms = tuple((n, norm_exponent(m)) for n, m in enumerate(powers))
    powers_verdict = equicontinuity_check(powers, system.seminorms, config.scaling_budget)
    oracle = power_bounded_oracle(b)

    # (b) criterion families over the sample grid, built incrementally per
    # lambda with both routes asserted at every order
    reg_ops: list[PadicMatrix] = []
    reg_grid: list[GridEntry] = []
    inc_ops: list[PadicMatrix] = []
    inc_grid: list[GridEntry] = []
    for lam in config.lambda_samples:
        lam = a._coerce_scalar(lam)
        label = _lambda_repr(lam)
        r = exact_resolvent(a, lam)
        ar = a @ r
        scale_inv = (lam * omega).invert() if scaled else lam.invert()
        omega_inv = omega.invert()
        diff_pow = ident      # (R - I)^n
        ar_pow = ident        # (A R)^n
        scale_pow = PadicScalar.one(p, a.backend, digits)   # (omega lambda)^(-n)
        omega_pow = PadicScalar.one(p, a.backend, digits)   # omega^(-n)
        for n in range(0, config.n_max + 1):
            if n > 0:
                diff_pow = diff_pow @ (r - ident)
                ar_pow = ar_pow @ ar
                scale_pow = scale_pow * scale_inv
                omega_pow = omega_pow * omega_inv if scaled else omega_pow
            reg_value = (diff_pow @ r).scale(scale_pow)
            reg_check = (ar_pow @ r).scale(omega_pow) if scaled else (ar_pow @ r)
            _dual_route_guard(a, reg_value, reg_check, f"regularized value n={n}")
            reg_ops.append(reg_value)
            reg_grid.append(GridEntry(label, n, norm_exponent(reg_value)))
            if n >= 1:
                inc_value = diff_pow.scale(scale_pow)
                inc_check = ar_pow.scale(omega_pow) if scaled else ar_pow
                _dual_route_guard(a, inc_value, inc_check, f"increment value n={n}")
                inc_ops.append(inc_value)
                inc_grid.append(GridEntry(label, n, norm_exponent(inc_value)))
    regularized_verdict = equicontinuity_check(reg_ops, system.seminorms,
                                               config.scaling_budget)
    increment_verdict = equicontinuity_check(inc_ops, system.seminorms,
                                             config.scaling_budget)

    # (c) identity residuals
    residuals: list[ResidualRecord] = []

    def record(check: str, label: str, order: int, exponent: Exponent) -> None:
        residuals.append(ResidualRecord(check, label, order, exponent,
                                        config.budget.residual_passes(exponent)))

    for lam in config.lambda_samples:
        label = _lambda_repr(a._coerce_scalar(lam))
        for n in range(1, min(4, config.n_max) + 1):
            try:
                record("derivative_identity", label, n,
                       derivative_identity_residual(a, lam, n))
            except InternalConsistencyError as exc:
                errors.append(str(exc))
    probe_lambda = config.lambda_samples[0]
    probe_label = _lambda_repr(a._coerce_scalar(probe_lambda))
    for k in range(0, min(6, config.n_max) + 1):
        record("power_reconstruction", probe_label, k,
               power_reconstruction_residual(a, probe_lambda, k))
    for n in range(0, min(3, config.n_max) + 1):
        exponent = None
        for k_trunc in (32, 64, 128, 256, 512):
            try:
                exponent = increment_series_residual(a, probe_lambda, n, k_trunc,
                                                     config.budget)
                break
            except DomainError:
                continue
        if exponent is None:
            errors.append(
                f"increment series tail for n={n} not certifiable by K=512")
        else:
            record("increment_series", probe_label, n, exponent)

    # (d) certificate for the forward direction
    bound_exponent: Exponent | None = None
    bound_stable: bool | None = None
    forward_holds: bool | None = None
    if oracle == "bounded":
        horizon = max(config.k_max, STABILITY_HORIZON)
        # only norm maxima matter here: a capped scan reads exact exponents for
        # entries nonzero at working precision and strictly negative certified
        # bounds otherwise, and the max is >= 0 (the k = 0 term), so the max
        # over the capped profile equals the exact one at constant word size
        scan = b if a.backend == CAPPED else b.to_capped(config.budget.digits)
        profile = power_norm_profile(scan, horizon)
        bound_exponent = max(profile[: config.k_max + 1])
        bound_stable = max(profile) == bound_exponent
        worst = max((e.norm_exponent for e in reg_grid + inc_grid), default=NEG_INF)
        forward_holds = worst <= bound_exponent

    statuses = {powers_verdict.status, regularized_verdict.status,
                increment_verdict.status}
    return VerdictReport(
        oracle_verdict=oracle,
        powers_verdict=powers_verdict,
        regularized_verdict=regularized_verdict,
        increment_verdict=increment_verdict,
        powers_norms=powers_norms,
        regularized_grid=tuple(reg_grid),
        increment_grid=tuple(inc_grid),
        residuals=tuple(residuals),
        bound_constant_exponent=bound_exponent,
        bound_stable=bound_stable,
        forward_bound_holds=forward_holds,
        agreement=(len(statuses) == 1),
        errors=tuple(errors),
    )
