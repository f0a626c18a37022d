"""Resolvent evaluation R(lambda, A) = (I - lambda A)^(-1) over Q_p.

Two independent routes are provided: a truncated Neumann series with a
certified tail exponent, and an exact linear solve.  In the ultrametric
setting a series converges iff its terms tend to zero, and the tail of a
truncated sum is bounded by the sup of the remaining term norms; the tail
certificates here exploit subadditivity of k -> log_p ||(lambda A)^k|| to
bound that sup over the whole infinite tail from finitely many powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    DomainError,
    InvalidInputError,
    OutOfRadiusError,
    SingularMatrixError,
)
from .linalg import PadicMatrix, mat_pow, norm_exponent, power_norm_profile
from .scalar import EXACT, Exponent, NEG_INF, POS_INF, PadicScalar


@dataclass(frozen=True)
class ResolventValue:
    """Truncated series evaluation with a certified absolute tail bound.

    ||true value - value|| <= p^tail_exponent.
    """

    value: PadicMatrix
    tail_exponent: Exponent
    lambda_used: PadicScalar
    truncation_k: int


def subadditive_tail_bound(term_exponents: Sequence[Exponent], k_trunc: int) -> Exponent:
    """Bound sup of t(k) over k > k_trunc for a subadditive sequence t.

    Uses t(k) <= (k // m) t(m) + t(k mod m) for any window m with t(m) < 0;
    returns POS_INF when no decaying window has been observed yet.
    """
    best: Exponent = POS_INF
    prefix_max: Exponent = term_exponents[0]  # t(0) = 0 for genuine series
    for m in range(1, k_trunc + 1):
        t_m = term_exponents[m]
        if t_m < 0:
            laps = (k_trunc + 1) // m
            if laps >= 1:
                bound = laps * t_m + prefix_max if t_m != NEG_INF else NEG_INF
                best = min(best, bound)
        prefix_max = max(prefix_max, t_m)
    return best


def _iteration_cap(dim: int, digits: int) -> int:
    return 10 * dim * digits


def _term_digits(a: PadicMatrix) -> int:
    return a._working_digits()


def neumann_resolvent(a: PadicMatrix, lam: PadicScalar,
                      target_exponent: int) -> ResolventValue:
    """Partial sum of sum_k (lambda A)^k with certified tail <= p^target_exponent.

    Raises DomainError when the term norms do not certify decay within the
    iteration cap (lambda outside the convergence disk).
    """
    lam = a._coerce_scalar(lam)
    if lam.is_zero:
        ident = PadicMatrix.identity(a.dim, a.prime, a.backend, _term_digits(a))
        return ResolventValue(ident, NEG_INF, lam, 0)
    step = a.scale(lam)
    cap = _iteration_cap(a.dim, _term_digits(a))
    power = PadicMatrix.identity(a.dim, a.prime, a.backend, _term_digits(a))
    acc = power
    exps: list[Exponent] = [0]
    for k in range(1, cap + 1):
        power = power @ step
        if power.is_zero() and a.backend == EXACT:
            return ResolventValue(acc, NEG_INF, lam, k - 1)
        acc = acc + power
        exps.append(norm_exponent(power))
        tail = subadditive_tail_bound(exps, k)
        if tail <= target_exponent:
            return ResolventValue(acc, tail, lam, k)
    raise DomainError(
        f"Neumann terms do not certify decay within {cap} iterations; "
        f"|lambda| = p^{lam.abs_exponent} is outside the certified disk")


def exact_resolvent(a: PadicMatrix, lam: PadicScalar) -> PadicMatrix:
    """(I - lambda A)^(-1) by Gauss-Jordan elimination with max-size pivoting.

    Exact on the rational backend; on the capped backend the pivot choice
    (largest absolute value first) keeps the precision loss minimal.
    """
    lam = a._coerce_scalar(lam)
    d = a.dim
    ident = PadicMatrix.identity(d, a.prime, a.backend, _term_digits(a))
    m = [list(row) for row in (ident - a.scale(lam)).rows]
    inv = [list(row) for row in ident.rows]
    for col in range(d):
        pivot_row, pivot_exp = -1, NEG_INF
        for r in range(col, d):
            e = m[r][col].abs_exponent
            if not m[r][col].is_zero and e > pivot_exp:
                pivot_row, pivot_exp = r, e
        if pivot_row < 0:
            raise SingularMatrixError(
                "I - lambda*A is singular: 1/lambda is an eigenvalue of A")
        if pivot_row != col:
            m[col], m[pivot_row] = m[pivot_row], m[col]
            inv[col], inv[pivot_row] = inv[pivot_row], inv[col]
        scale = m[col][col].invert()
        m[col] = [scale * x for x in m[col]]
        inv[col] = [scale * x for x in inv[col]]
        for r in range(d):
            # capped zero-to-precision factors still flow through, so the
            # surviving entries inherit the degraded absolute precision
            if r == col or m[r][col].is_exact_zero:
                continue
            factor = m[r][col]
            m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
            inv[r] = [x - factor * y for x, y in zip(inv[r], inv[col])]
    return PadicMatrix(inv)


def resolvent_derivative(a: PadicMatrix, lam: PadicScalar, j: int,
                         target_exponent: int) -> ResolventValue:
    """j-th derivative of lambda -> R(lambda, A) by certified truncated series.

    The series is sum_{k>=j} k(k-1)...(k-j+1) lambda^(k-j) A^k; its integer
    coefficients have p-adic size <= 1, so the base Neumann tail shifted by
    |lambda|^(-j) certifies the truncation.
    """
    if j < 0:
        raise InvalidInputError("derivative order must be >= 0")
    if j == 0:
        return neumann_resolvent(a, lam, target_exponent)
    lam = a._coerce_scalar(lam)
    digits = _term_digits(a)
    if lam.is_zero:
        value = mat_pow(a, j).scale(math.factorial(j))
        return ResolventValue(value, NEG_INF, lam, j)
    lam_inv_j = lam ** (-j)
    step = a.scale(lam)
    cap = _iteration_cap(a.dim, digits)
    power = PadicMatrix.identity(a.dim, a.prime, a.backend, digits)
    acc = PadicMatrix.zeros(a.dim, a.prime, a.backend, digits)
    exps: list[Exponent] = [0]
    shift = -j * lam.abs_exponent
    for k in range(1, cap + 1):
        power = power @ step
        if k >= j:
            acc = acc + power.scale(lam_inv_j * a._coerce_scalar(math.perm(k, j)))
        if power.is_zero() and a.backend == EXACT and k >= j:
            return ResolventValue(acc, NEG_INF, lam, k - 1)
        exps.append(norm_exponent(power))
        if k > j:
            tail = subadditive_tail_bound(exps, k)
            if tail != POS_INF and tail + shift <= target_exponent:
                return ResolventValue(acc, tail + shift, lam, k)
    raise DomainError("derivative series terms do not certify decay; "
                      "lambda is outside the certified disk")


def recentered_resolvent(a: PadicMatrix, mu: PadicScalar, lam: PadicScalar,
                         target_exponent: int) -> ResolventValue:
    """R(lambda, A) summed around mu, coefficients in division-free closed form.

    Evaluates sum_j mu^(-j) (R(mu)-I)^j R(mu) (lambda-mu)^j, i.e. the Taylor
    coefficients R^(j)(mu)/j! rewritten so no division by j! (whose p-adic
    size is tiny) ever happens.
    """
    mu = a._coerce_scalar(mu)
    lam = a._coerce_scalar(lam)
    if mu.is_zero:
        return neumann_resolvent(a, lam, target_exponent)
    r_mu = exact_resolvent(a, mu)
    ident = PadicMatrix.identity(a.dim, a.prime, a.backend, _term_digits(a))
    delta = lam - mu
    if delta.is_zero:
        return ResolventValue(r_mu, NEG_INF, lam, 0)
    ratio = delta / mu
    factor = (r_mu - ident).scale(ratio)
    shift = norm_exponent(r_mu)
    cap = _iteration_cap(a.dim, _term_digits(a))
    power = ident
    acc = ident
    exps: list[Exponent] = [0]
    for k in range(1, cap + 1):
        power = power @ factor
        if power.is_zero() and a.backend == EXACT:
            return ResolventValue(acc @ r_mu, NEG_INF, lam, k - 1)
        acc = acc + power
        exps.append(norm_exponent(power))
        tail = subadditive_tail_bound(exps, k)
        if tail != POS_INF and tail + shift <= target_exponent:
            return ResolventValue(acc @ r_mu, tail + shift, lam, k)
    raise OutOfRadiusError(
        "recentering terms do not decay: lambda lies outside the disk around mu")


def convergence_radius_exponent(a: PadicMatrix, k_max: int | None = None) -> Exponent:
    """Largest integer r certified so that |lambda| < p^r makes the terms vanish.

    From finitely many powers, the best certified growth slope is
    rho = min_k ||A^k||-exponent / k (an upper bound for the true limit by
    subadditivity), and any integer e < -rho gives certified decay.  Returns
    POS_INF for nilpotent A.  Conservative: never exceeds the true radius.
    """
    if k_max is None:
        k_max = max(2 * a.dim, 16)
    if k_max < a.dim:
        raise InvalidInputError("k_max must be at least the matrix dimension")
    profile = power_norm_profile(a, k_max)
    if any(e == NEG_INF for e in profile[1:]):
        return POS_INF
    rho = min(Fraction(int(profile[k]), k) for k in range(1, k_max + 1))
    bound = 1 - rho  # admissible integers e satisfy e <= r - 1 < -rho
    if bound.denominator == 1:
        return int(bound) - 1
    return math.floor(bound)
