"""Shared strategies and builders for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import HealthCheck, settings

from padic_resolvent.scalar import CAPPED, EXACT, PadicScalar

settings.register_profile(
    "deterministic",
    derandomize=True,
    max_examples=80,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")

PRIMES = (2, 3, 5)


def random_fraction(rng: random.Random, p: int, min_val: int = -3) -> Fraction:
    """Nonzero rational with v_p in [min_val, ~6]."""
    unit_num = rng.choice([n for n in range(-30, 31) if n and n % p])
    unit_den = rng.choice([n for n in range(1, 30) if n % p])
    return Fraction(unit_num, unit_den) * Fraction(p) ** rng.randint(min_val, 6)


def exact(value, p):
    return PadicScalar.from_fraction(Fraction(value), p, EXACT)


def capped(value, p, digits=64):
    return PadicScalar.from_fraction(Fraction(value), p, CAPPED, digits)
