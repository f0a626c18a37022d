"""Matrices, norms, characteristic polynomial oracle, seminorm families."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import PRIMES, exact, random_fraction
from padic_resolvent.errors import InvalidInputError
from padic_resolvent.linalg import (
    PadicMatrix,
    SeminormFamily,
    char_poly,
    char_poly_minors,
    column_norm_exponent,
    equicontinuity_check,
    mat_pow,
    newton_slopes,
    norm_exponent,
    power_bounded_oracle,
    power_norm_profile,
    seminorm_eval,
)
from padic_resolvent.scalar import NEG_INF


def rand_matrix(rng: random.Random, d: int, p: int, min_val: int = -2) -> PadicMatrix:
    return PadicMatrix.from_rationals(
        [[random_fraction(rng, p, min_val) if rng.random() < 0.85 else 0
          for _ in range(d)] for _ in range(d)], p)


def rand_integral_matrix(rng: random.Random, d: int, p: int) -> PadicMatrix:
    dens = [n for n in range(1, 12) if n % p]
    return PadicMatrix.from_rationals(
        [[Fraction(rng.randint(-9, 9), rng.choice(dens)) for _ in range(d)]
         for _ in range(d)], p)


# -- powers and norms ---------------------------------------------------


def test_mat_pow_unipotent():
    a = PadicMatrix.from_rationals([[1, 1], [0, 1]], 2)
    assert mat_pow(a, 5) == PadicMatrix.from_rationals([[1, 5], [0, 1]], 2)
    assert mat_pow(a, 0) == PadicMatrix.identity(2, 2)


def test_mat_pow_zero():
    z = PadicMatrix.zeros(3, 3)
    assert mat_pow(z, 3) == z


def test_mat_pow_diagonal_norm():
    a = PadicMatrix.diagonal([2, 3], 2)
    a4 = mat_pow(a, 4)
    assert a4 == PadicMatrix.diagonal([16, 81], 2)
    assert norm_exponent(a4) == 0  # |81|_2 = 1 dominates |16|_2 = 2^-4


def test_norm_exponent_examples():
    a5 = mat_pow(PadicMatrix.from_rationals([[1, 1], [0, 1]], 5), 5)
    assert norm_exponent(a5) == 0
    assert norm_exponent(PadicMatrix.zeros(2, 2)) == NEG_INF
    b = PadicMatrix.from_rationals([[0, Fraction(1, 2)], [0, 0]], 2)
    assert norm_exponent(b) == 1


def test_norm_attained_on_basis_vectors():
    rng = random.Random(11)
    for _ in range(50):
        p = rng.choice(PRIMES)
        a = rand_matrix(rng, rng.randint(1, 4), p)
        assert norm_exponent(a) == max(
            column_norm_exponent(a, j) for j in range(a.dim))


@given(st.integers(0, 10**6), st.sampled_from(PRIMES), st.integers(2, 3))
def test_norm_submultiplicative_and_ultrametric(seed, p, d):
    rng = random.Random(seed)
    a, b = rand_matrix(rng, d, p), rand_matrix(rng, d, p)
    assert norm_exponent(a @ b) <= norm_exponent(a) + norm_exponent(b)
    assert norm_exponent(a + b) <= max(norm_exponent(a), norm_exponent(b))


# -- characteristic polynomial ------------------------------------------


def test_char_poly_examples():
    a = PadicMatrix.from_rationals([[1, 1], [0, 1]], 2)
    assert char_poly(a) == [Fraction(1), Fraction(-2), Fraction(1)]
    z = PadicMatrix.zeros(3, 7)
    assert char_poly(z) == [Fraction(0)] * 3 + [Fraction(1)]
    d = PadicMatrix.diagonal([Fraction(1, 2), 1], 2)
    assert char_poly(d) == [Fraction(1, 2), Fraction(-3, 2), Fraction(1)]


def test_char_poly_two_routes_agree():
    rng = random.Random(37)
    for _ in range(40):
        p = rng.choice(PRIMES)
        a = rand_matrix(rng, rng.randint(1, 4), p)
        assert char_poly(a) == char_poly_minors(a)


def test_char_poly_capped_inputs_are_lifted():
    a = PadicMatrix.from_rationals([[1, 1], [0, 1]], 2).to_capped(32)
    assert char_poly(a) == [Fraction(1), Fraction(-2), Fraction(1)]


# -- power-boundedness oracle -------------------------------------------


def test_oracle_examples():
    assert power_bounded_oracle(PadicMatrix.from_rationals([[1, 1], [0, 1]], 2)) == "bounded"
    assert power_bounded_oracle(PadicMatrix.diagonal([Fraction(1, 2), 1], 2)) == "unbounded"
    assert power_bounded_oracle(PadicMatrix.zeros(2, 5)) == "bounded"


def test_oracle_matches_newton_polygon():
    rng = random.Random(99)
    for _ in range(60):
        p = rng.choice(PRIMES)
        a = rand_matrix(rng, rng.randint(1, 4), p)
        slopes = newton_slopes(char_poly(a), p)
        integral = all(v >= 0 for v in slopes)
        assert power_bounded_oracle(a) == ("bounded" if integral else "unbounded")


def test_oracle_norm_growth_desk_scale():
    # bounded: profile stabilizes early; unbounded: it must blow past 20
    a = PadicMatrix.from_rationals([[1, 1], [0, 1]], 2)
    prof = power_norm_profile(a, 120)
    assert max(prof) == max(prof[:60])
    b = PadicMatrix.diagonal([Fraction(1, 2), 1], 2)
    profile = power_norm_profile(b, 40)
    assert profile[25] == 25
    assert any(e > 20 for e in profile)


def test_power_norm_profile_nilpotent_short_circuit():
    a = PadicMatrix.from_rationals([[0, Fraction(1, 2), 0], [0, 0, 4], [0, 0, 0]], 2)
    prof = power_norm_profile(a, 10)
    assert prof[0] == 0 and prof[1] == 1 and prof[2] == -1
    assert all(e == NEG_INF for e in prof[3:])
    assert len(prof) == 11


# -- seminorms ------------------------------------------------------------


def vec(values, p):
    return [exact(v, p) for v in values]


def test_seminorm_eval_examples():
    assert seminorm_eval((0, 0), vec([2, 3], 2)) == 0
    assert seminorm_eval((5, NEG_INF), vec([0, 0], 2)) == NEG_INF
    assert seminorm_eval((NEG_INF, 0), vec([Fraction(1, 2), 4], 2)) == -2


def test_seminorm_axioms_randomized():
    rng = random.Random(5150)
    checks = 0
    for _ in range(300):
        p = rng.choice(PRIMES)
        d = rng.randint(1, 4)
        w = tuple(rng.choice([NEG_INF, rng.randint(-4, 4)]) for _ in range(d))
        x = [exact(random_fraction(rng, p) if rng.random() < 0.9 else 0, p) for _ in range(d)]
        y = [exact(random_fraction(rng, p) if rng.random() < 0.9 else 0, p) for _ in range(d)]
        lam = exact(random_fraction(rng, p), p)
        # |lambda|-homogeneity, exact in exponents
        assert seminorm_eval(w, [lam * xi for xi in x]) == (
            lam.abs_exponent + seminorm_eval(w, x)
            if seminorm_eval(w, x) != NEG_INF else NEG_INF)
        # ultrametric triangle inequality
        s = [xi + yi for xi, yi in zip(x, y)]
        assert seminorm_eval(w, s) <= max(seminorm_eval(w, x), seminorm_eval(w, y))
        checks += 2
    assert checks >= 600


def test_family_hausdorff_flag():
    fam = SeminormFamily(2, ((0, NEG_INF), (NEG_INF, -3)))
    assert fam.is_hausdorff()
    assert not SeminormFamily(2, ((0, NEG_INF),)).is_hausdorff()


# -- equi-continuity checker ----------------------------------------------


def test_equicontinuity_witnessed_integral_diagonal():
    fam = SeminormFamily.sup_norm(2)
    ops = [mat_pow(PadicMatrix.diagonal([2, 1], 2), n) for n in range(11)]
    verdict = equicontinuity_check(ops, fam)
    assert verdict.status == "witnessed"
    assert verdict.witnesses == ((0, 0, 0),)


def test_equicontinuity_identity_trivial():
    fam = SeminormFamily(2, ((0, -2), (1, NEG_INF), (NEG_INF, 3)))
    verdict = equicontinuity_check([PadicMatrix.identity(2, 3)], fam)
    assert verdict.status == "witnessed"
    for qi, pi, s in verdict.witnesses:
        assert (pi, s) == (qi, 0)


def test_equicontinuity_refuted_with_budget():
    fam = SeminormFamily.sup_norm(1)
    ops = [mat_pow(PadicMatrix.diagonal([Fraction(1, 2)], 2), n) for n in range(11)]
    verdict = equicontinuity_check(ops, fam, scaling_budget=5)
    assert verdict.status == "refuted"
    ref = verdict.refutation
    assert ref.needed_scale == 10
    assert ref.basis_index == 0
    assert ref.operator_index == 10


def test_equicontinuity_requires_hausdorff():
    fam = SeminormFamily(2, ((0, NEG_INF),))
    with pytest.raises(InvalidInputError):
        equicontinuity_check([PadicMatrix.identity(2, 2)], fam)


def test_witness_holds_on_random_vectors_and_refutation_is_sharp():
    rng = random.Random(808)
    fam = SeminormFamily(2, ((0, 0), (2, -1)))
    ops = [mat_pow(PadicMatrix.from_rationals([[1, Fraction(1, 4)], [0, 1]], 2), n)
           for n in range(6)]
    verdict = equicontinuity_check(ops, fam)
    assert verdict.status == "witnessed"
    for qi, pi, s in verdict.witnesses:
        q, pw = fam.members[qi], fam.members[pi]
        for _ in range(1000):
            x = [exact(random_fraction(rng, 2) if rng.random() < 0.9 else 0, 2)
                 for _ in range(2)]
            px = seminorm_eval(pw, x)
            for t in ops:
                assert seminorm_eval(q, t.apply(x)) <= s + px

    refuted = equicontinuity_check(ops, fam, scaling_budget=1)
    assert refuted.status == "refuted"
    ref = refuted.refutation
    q = fam.members[ref.member_index]
    basis = [exact(1 if i == ref.basis_index else 0, 2) for i in range(2)]
    t = ops[ref.operator_index]
    got = seminorm_eval(q, t.apply(basis))
    # the recorded needed scale really is forced for the best candidate
    best = fam.members[ref.best_member_index]
    assert got - seminorm_eval(best, basis) == ref.needed_scale
    assert ref.needed_scale > 1
