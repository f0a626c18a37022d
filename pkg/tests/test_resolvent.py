"""Neumann-series resolvents vs the exact linear solve, derivatives, recentering."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from conftest import PRIMES, exact, random_fraction
from padic_resolvent.errors import DomainError, OutOfRadiusError, SingularMatrixError
from padic_resolvent.linalg import PadicMatrix, mat_pow, norm_exponent, power_bounded_oracle
from padic_resolvent.resolvent import (
    convergence_radius_exponent,
    exact_resolvent,
    neumann_resolvent,
    recentered_resolvent,
    resolvent_derivative,
    subadditive_tail_bound,
)
from padic_resolvent.scalar import CAPPED, NEG_INF, POS_INF, PadicScalar


def scalar_mat(value, p, backend="exact", digits=64):
    return PadicMatrix.from_rationals([[value]], p, backend, digits)


def lam(value, p, backend="exact", digits=64):
    return PadicScalar.from_fraction(Fraction(value), p, backend, digits)


def rand_bounded(rng, d, p):
    dens = [n for n in range(1, 10) if n % p]
    return PadicMatrix.from_rationals(
        [[Fraction(rng.randint(-9, 9), rng.choice(dens)) for _ in range(d)]
         for _ in range(d)], p)


# -- tail bound helper ----------------------------------------------------


def test_subadditive_tail_bound_geometric():
    exps = [0, -2, -4, -6, -8]
    assert subadditive_tail_bound(exps, 4) <= -10
    assert subadditive_tail_bound([0, 3, 6], 2) == POS_INF


def test_subadditive_tail_bound_nilpotent():
    assert subadditive_tail_bound([0, 2, NEG_INF], 2) == NEG_INF


# -- Neumann series -------------------------------------------------------


def test_neumann_scalar_example():
    a = scalar_mat(2, 2)
    rv = neumann_resolvent(a, lam(2, 2), -64)
    expected = Fraction(-1, 3)  # (1 - 4)^(-1)
    diff = rv.value.entry(0, 0).to_fraction() - expected
    assert exact(diff, 2).abs_exponent <= rv.tail_exponent
    assert rv.tail_exponent <= -64
    capped_rv = neumann_resolvent(scalar_mat(2, 2, CAPPED, 3), lam(2, 2, CAPPED, 3), -8)
    assert capped_rv.value.entry(0, 0).lift_exact().to_fraction() % 8 == 5


def test_neumann_nilpotent_terminates():
    a = PadicMatrix.from_rationals([[0, 1], [0, 0]], 3)
    for lv in (3, 9, Fraction(1, 3)):
        rv = neumann_resolvent(a, lam(lv, 3), -40)
        ident = PadicMatrix.identity(2, 3)
        assert rv.value == ident + a.scale(lam(lv, 3))
        assert rv.tail_exponent == NEG_INF
        assert rv.truncation_k == 1


def test_neumann_diagonal_capped_digits():
    a = PadicMatrix.diagonal([2, 3], 2, CAPPED, 3)
    rv = neumann_resolvent(a, lam(2, 2, CAPPED, 3), -8)
    assert rv.value.entry(0, 0).lift_exact().to_fraction() % 8 == 5  # -1/3 mod 8
    assert rv.value.entry(1, 1).lift_exact().to_fraction() % 8 == 3  # -1/5 mod 8


def test_neumann_divergence_detected():
    a = PadicMatrix.diagonal([Fraction(1, 2)], 2)
    with pytest.raises(DomainError):
        neumann_resolvent(a, lam(1, 2), -10)


def test_neumann_residual_certificate():
    # ||(I - lambda A) value - I|| <= p^(tail + ||I - lambda A||-exponent)
    rng = random.Random(314)
    for _ in range(25):
        p = rng.choice(PRIMES)
        d = rng.randint(1, 3)
        a = rand_bounded(rng, d, p)
        lv = lam(Fraction(p) * random_fraction(rng, p, 0), p)
        rv = neumann_resolvent(a, lv, -50)
        ident = PadicMatrix.identity(d, p)
        factor = ident - a.scale(lv)
        residual = factor @ rv.value - ident
        assert norm_exponent(residual) <= rv.tail_exponent + norm_exponent(factor)


# -- exact solve ----------------------------------------------------------


def test_exact_resolvent_examples():
    assert exact_resolvent(scalar_mat(2, 2), lam(2, 2)).entry(0, 0).to_fraction() \
        == Fraction(-1, 3)
    a = rand_bounded(random.Random(1), 3, 5)
    assert exact_resolvent(a, lam(0, 5)) == PadicMatrix.identity(3, 5)
    d = exact_resolvent(PadicMatrix.diagonal([2, 3], 2), lam(2, 2))
    assert d.entry(0, 0).to_fraction() == Fraction(-1, 3)
    assert d.entry(1, 1).to_fraction() == Fraction(-1, 5)


def test_exact_resolvent_singular():
    a = PadicMatrix.diagonal([1], 2)
    with pytest.raises(SingularMatrixError):
        exact_resolvent(a, lam(1, 2))


def test_neumann_matches_exact_solve_both_backends():
    rng = random.Random(2718)
    for _ in range(100):
        p = rng.choice(PRIMES)
        d = rng.randint(1, 3)
        a = rand_bounded(rng, d, p)
        lv = Fraction(p) ** rng.randint(1, 3) * Fraction(rng.choice([1, 1 + p]))
        rv = neumann_resolvent(a, lam(lv, p), -60)
        solve = exact_resolvent(a, lam(lv, p))
        assert norm_exponent(rv.value - solve) <= rv.tail_exponent
        ac = a.to_capped(64)
        rv_c = neumann_resolvent(ac, lam(lv, p, CAPPED), -54)
        solve_c = exact_resolvent(ac, lam(lv, p, CAPPED))
        assert norm_exponent(rv_c.value - solve_c) <= -50


def test_resolvent_minus_identity_identity():
    # R - I = lambda A R, exactly, on the rational backend
    rng = random.Random(99)
    for _ in range(30):
        p = rng.choice(PRIMES)
        a = rand_bounded(rng, rng.randint(1, 3), p)
        lv = lam(Fraction(p) ** rng.randint(1, 3), p)
        r = exact_resolvent(a, lv)
        ident = PadicMatrix.identity(a.dim, p)
        assert r - ident == (a @ r).scale(lv)


# -- derivatives ----------------------------------------------------------


def test_derivative_scalar_example():
    rv = resolvent_derivative(scalar_mat(2, 2), lam(2, 2), 1, -60)
    expected = Fraction(2, 9)  # a (1 - lambda a)^(-2)
    diff = rv.value.entry(0, 0).to_fraction() - expected
    assert exact(diff, 2).abs_exponent <= rv.tail_exponent


def test_derivative_nilpotent():
    a = PadicMatrix.from_rationals([[0, 1], [0, 0]], 5)
    rv = resolvent_derivative(a, lam(5, 5), 1, -40)
    assert rv.value == a
    assert rv.tail_exponent == NEG_INF


def test_derivative_j0_is_resolvent():
    a = scalar_mat(3, 3)
    assert resolvent_derivative(a, lam(3, 3), 0, -30).value == \
        neumann_resolvent(a, lam(3, 3), -30).value


def test_derivative_series_matches_closed_form():
    # independent closed form: R^(j) = j! A^j R^(j+1)
    import math as _math

    rng = random.Random(4242)
    for _ in range(20):
        p = rng.choice(PRIMES)
        d = rng.randint(1, 3)
        a = rand_bounded(rng, d, p)
        j = rng.randint(1, 3)
        lv = lam(Fraction(p) ** rng.randint(1, 2), p)
        rv = resolvent_derivative(a, lv, j, -55)
        r = exact_resolvent(a, lv)
        closed = (mat_pow(a, j) @ mat_pow(r, j + 1)).scale(_math.factorial(j))
        assert norm_exponent(rv.value - closed) <= rv.tail_exponent


def test_divided_difference_bound():
    # ||(R(l+h) - R(l))/h - R'(l)|| <= |h| * C with C from the 2nd derivative
    rng = random.Random(777)
    for d in (1, 3):
        for p in PRIMES:
            a = rand_bounded(rng, d, p)
            lv = lam(Fraction(p), p)
            r1 = resolvent_derivative(a, lv, 1, -58).value
            for m in (3, 4, 5):
                h = lam(Fraction(p) ** m, p)
                num = exact_resolvent(a, lv + h) - exact_resolvent(a, lv)
                dd = num.scale(h.invert())
                second = (mat_pow(a, 2) @ mat_pow(exact_resolvent(a, lv), 3)).scale(2)
                c_exp = max(norm_exponent(second) - 1, 0)
                assert norm_exponent(dd - r1) <= h.abs_exponent + c_exp + 2


# -- recentering ----------------------------------------------------------


def test_recenter_scalar_example():
    rv = recentered_resolvent(scalar_mat(2, 2), lam(2, 2), lam(4, 2), -60)
    expected = Fraction(-1, 7)  # direct R(4) = (1 - 8)^(-1)
    diff = rv.value.entry(0, 0).to_fraction() - expected
    assert exact(diff, 2).abs_exponent <= rv.tail_exponent


def test_recenter_at_same_point():
    a = rand_bounded(random.Random(3), 2, 3)
    rv = recentered_resolvent(a, lam(3, 3), lam(3, 3), -40)
    assert rv.value == exact_resolvent(a, lam(3, 3))
    assert rv.truncation_k == 0


def test_recenter_nilpotent():
    a = PadicMatrix.from_rationals([[0, 1], [0, 0]], 2)
    rv = recentered_resolvent(a, lam(1, 2), lam(3, 2), -40)
    assert rv.value == PadicMatrix.identity(2, 2) + a.scale(lam(3, 2))


def test_recenter_agrees_with_direct():
    rng = random.Random(555)
    for _ in range(20):
        p = rng.choice(PRIMES)
        a = rand_bounded(rng, rng.randint(1, 3), p)
        mu = lam(Fraction(p) ** rng.randint(1, 2), p)
        lv = lam(Fraction(p) ** rng.randint(1, 2) * rng.choice([1, 1 + p]), p)
        rv = recentered_resolvent(a, mu, lv, -50)
        direct = exact_resolvent(a, lv)
        assert norm_exponent(rv.value - direct) <= rv.tail_exponent


def test_recenter_out_of_radius():
    a = PadicMatrix.diagonal([1], 2)  # R(lambda) = 1/(1-lambda), pole at 1
    with pytest.raises(OutOfRadiusError):
        recentered_resolvent(a, lam(2, 2), lam(1, 2), -20)


# -- convergence radius ----------------------------------------------------


def test_radius_examples():
    assert convergence_radius_exponent(PadicMatrix.diagonal([2], 2)) == 1
    assert convergence_radius_exponent(PadicMatrix.from_rationals([[1, 1], [0, 1]], 2)) == 0
    assert convergence_radius_exponent(PadicMatrix.diagonal([Fraction(1, 2)], 2)) == -1
    nilp = PadicMatrix.from_rationals([[0, 4], [0, 0]], 2)
    assert convergence_radius_exponent(nilp) == POS_INF


def test_radius_nonnegative_for_oracle_bounded():
    rng = random.Random(123)
    for _ in range(30):
        p = rng.choice(PRIMES)
        a = rand_bounded(rng, rng.randint(1, 3), p)
        assert power_bounded_oracle(a) == "bounded"
        assert convergence_radius_exponent(a, 24) >= 0
