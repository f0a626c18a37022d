"""Arithmetic in Q_p under two backends: exact rationals and capped base-p digits.

All sizes are tracked as integer valuation exponents; |x| = p^(-valuation(x)).
The exact backend is the ground truth, the capped backend models finite
precision: a nonzero value is p^v * u with the unit u known modulo p^N, and a
cancellation that eats the known digits yields a distinct "zero to precision"
state rather than an exact zero.

Infinite sentinels use math.inf; every finite exponent is a Python int.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import InvalidInputError, SingularElementError

NEG_INF = -math.inf
POS_INF = math.inf

#: Finite exponents are ints; +-math.inf mark zero / everything.
Exponent = Union[int, float]

DEFAULT_DIGITS = 64

EXACT = "exact"
CAPPED = "capped"


def int_valuation(n: int, p: int) -> Exponent:
    """v_p(n) for an integer, POS_INF for 0."""
    if n == 0:
        return POS_INF
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def fraction_valuation(q: Fraction, p: int) -> Exponent:
    """v_p(num) - v_p(den), recomputed from the reduced fraction."""
    if q == 0:
        return POS_INF
    return int_valuation(q.numerator, p) - int_valuation(q.denominator, p)


def _check_prime(p: int) -> None:
    if not isinstance(p, int) or p < 2:
        raise InvalidInputError(f"prime must be an integer >= 2, got {p!r}")


@dataclass(frozen=True)
class PrecisionBudget:
    """Working precision plus the slack used to judge residuals.

    A residual passes when its valuation is at least digits - slack,
    i.e. its norm exponent is <= -(digits - slack).
    """

    digits: int = DEFAULT_DIGITS
    slack: int = 10

    def __post_init__(self) -> None:
        if not (self.digits > self.slack >= 0):
            raise InvalidInputError(
                f"need digits > slack >= 0, got digits={self.digits} slack={self.slack}"
            )

    @property
    def tolerance_exponent(self) -> int:
        return -(self.digits - self.slack)

    def residual_passes(self, exponent: Exponent) -> bool:
        return exponent <= self.tolerance_exponent


class PadicScalar:
    """An element of Q_p.

    Exact backend: a reduced Fraction.  Capped backend: either a nonzero
    value (valuation v, unit u with 0 < u < p^N and u % p != 0, relative
    precision N) or a zero state carrying the absolute precision to which
    the value is known to vanish (None meaning exactly zero).
    """

    __slots__ = ("prime", "backend", "_frac", "_val", "_unit", "_rel", "_zero_abs")

    def __init__(self) -> None:
        raise TypeError("use PadicScalar.from_rational / from_fraction / zero / one")

    # -- construction -------------------------------------------------

    @classmethod
    def _exact(cls, frac: Fraction, p: int) -> "PadicScalar":
        self = object.__new__(cls)
        object.__setattr__(self, "prime", p)
        object.__setattr__(self, "backend", EXACT)
        object.__setattr__(self, "_frac", frac)
        object.__setattr__(self, "_val", fraction_valuation(frac, p))
        object.__setattr__(self, "_unit", None)
        object.__setattr__(self, "_rel", None)
        object.__setattr__(self, "_zero_abs", None)
        return self

    @classmethod
    def _capped(cls, p: int, val: int, unit: int, rel: int) -> "PadicScalar":
        self = object.__new__(cls)
        object.__setattr__(self, "prime", p)
        object.__setattr__(self, "backend", CAPPED)
        object.__setattr__(self, "_frac", None)
        object.__setattr__(self, "_val", val)
        object.__setattr__(self, "_unit", unit)
        object.__setattr__(self, "_rel", rel)
        object.__setattr__(self, "_zero_abs", None)
        return self

    @classmethod
    def _capped_zero(cls, p: int, abs_prec: Exponent) -> "PadicScalar":
        # abs_prec POS_INF encodes the exact zero of the capped backend.
        self = object.__new__(cls)
        object.__setattr__(self, "prime", p)
        object.__setattr__(self, "backend", CAPPED)
        object.__setattr__(self, "_frac", None)
        object.__setattr__(self, "_val", POS_INF)
        object.__setattr__(self, "_unit", None)
        object.__setattr__(self, "_rel", None)
        object.__setattr__(self, "_zero_abs", abs_prec)
        return self

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("PadicScalar is immutable")

    @classmethod
    def from_fraction(
        cls,
        value: Fraction | int,
        p: int,
        backend: str = EXACT,
        digits: int = DEFAULT_DIGITS,
    ) -> "PadicScalar":
        _check_prime(p)
        frac = Fraction(value)
        if backend == EXACT:
            return cls._exact(frac, p)
        if backend != CAPPED:
            raise InvalidInputError(f"unknown backend {backend!r}")
        if digits < 1:
            raise InvalidInputError("capped backend needs at least one digit")
        if frac == 0:
            return cls._capped_zero(p, POS_INF)
        vn = int_valuation(frac.numerator, p)
        vd = int_valuation(frac.denominator, p)
        val = vn - vd
        num_unit = frac.numerator // p**vn
        den_unit = frac.denominator // p**vd
        modulus = p**digits
        unit = num_unit * pow(den_unit, -1, modulus) % modulus
        return cls._capped(p, val, unit, digits)

    @classmethod
    def from_rational(
        cls,
        num: int,
        den: int,
        p: int,
        backend: str = EXACT,
        digits: int = DEFAULT_DIGITS,
    ) -> "PadicScalar":
        if den == 0:
            raise InvalidInputError("denominator must be nonzero")
        return cls.from_fraction(Fraction(num, den), p, backend, digits)

    @classmethod
    def zero(cls, p: int, backend: str = EXACT, digits: int = DEFAULT_DIGITS) -> "PadicScalar":
        return cls.from_fraction(0, p, backend, digits)

    @classmethod
    def one(cls, p: int, backend: str = EXACT, digits: int = DEFAULT_DIGITS) -> "PadicScalar":
        return cls.from_fraction(1, p, backend, digits)

    # -- queries -------------------------------------------------------

    @property
    def valuation(self) -> Exponent:
        """v_p(x); POS_INF for exact zero and for zero-to-precision."""
        return self._val

    @property
    def abs_exponent(self) -> Exponent:
        """e with |x| = p^e.

        Exact for nonzero values and NEG_INF for exact zero.  For a capped
        zero-to-precision state the true size is unknowable, so this returns
        the certified upper bound -abs_prec (|x| <= p^-abs_prec).
        """
        if self._zero_abs is not None and self._zero_abs != POS_INF:
            return -self._zero_abs
        return -self._val

    @property
    def is_zero(self) -> bool:
        """True for exact zero and for zero-to-precision."""
        return self._val == POS_INF

    @property
    def is_exact_zero(self) -> bool:
        if self.backend == EXACT:
            return self._frac == 0
        return self._zero_abs == POS_INF

    @property
    def relative_precision(self) -> Exponent:
        """Known unit digits (POS_INF on the exact backend)."""
        if self.backend == EXACT:
            return POS_INF
        if self.is_zero:
            return POS_INF if self._zero_abs == POS_INF else 0
        return self._rel

    @property
    def absolute_precision(self) -> Exponent:
        """x is known modulo p^(this exponent)."""
        if self.backend == EXACT:
            return POS_INF
        if self.is_zero:
            return self._zero_abs
        return self._val + self._rel

    @property
    def unit(self) -> int:
        """Unit part of a nonzero capped value (integer mod p^N)."""
        if self.backend != CAPPED or self.is_zero:
            raise InvalidInputError("unit part only exists for nonzero capped values")
        return self._unit

    def unit_digits(self) -> tuple[int, ...]:
        """Base-p digits of the unit part, lowest first; leading digit nonzero."""
        u, p = self.unit, self.prime
        out = []
        for _ in range(self._rel):
            u, d = divmod(u, p)
            out.append(d)
        return tuple(out)

    def to_fraction(self) -> Fraction:
        if self.backend != EXACT:
            raise InvalidInputError("to_fraction requires the exact backend; see representative()")
        return self._frac

    def representative(self) -> Fraction:
        """A rational representing all known digits (the value itself when exact)."""
        if self.backend == EXACT:
            return self._frac
        if self.is_zero:
            return Fraction(0)
        return Fraction(self._unit) * Fraction(self.prime) ** self._val

    def lift_exact(self) -> "PadicScalar":
        """Exact-backend scalar built from the known digits."""
        if self.backend == EXACT:
            return self
        return PadicScalar._exact(self.representative(), self.prime)

    def to_capped(self, digits: int = DEFAULT_DIGITS) -> "PadicScalar":
        if self.backend == CAPPED:
            return self
        return PadicScalar.from_fraction(self._frac, self.prime, CAPPED, digits)

    # -- arithmetic ----------------------------------------------------

    def _require_compatible(self, other: "PadicScalar") -> None:
        if not isinstance(other, PadicScalar):
            raise InvalidInputError(f"expected PadicScalar, got {type(other).__name__}")
        if self.prime != other.prime or self.backend != other.backend:
            raise InvalidInputError(
                f"mixed operands: p={self.prime}/{other.prime}, "
                f"backend={self.backend}/{other.backend}"
            )

    def __add__(self, other: "PadicScalar") -> "PadicScalar":
        self._require_compatible(other)
        p = self.prime
        if self.backend == EXACT:
            return PadicScalar._exact(self._frac + other._frac, p)
        if self.is_exact_zero:
            return other
        if other.is_exact_zero:
            return self
        abs_prec = min(self.absolute_precision, other.absolute_precision)
        if self.is_zero and other.is_zero:
            return PadicScalar._capped_zero(p, abs_prec)
        if self.is_zero or other.is_zero:
            x = other if self.is_zero else self
            if x._val >= abs_prec:
                return PadicScalar._capped_zero(p, abs_prec)
            return PadicScalar._capped(p, x._val, x._unit % p ** (abs_prec - x._val),
                                       abs_prec - x._val)
        v0 = min(self._val, other._val)
        window = abs_prec - v0
        total = (self._unit * p ** (self._val - v0)
                 + other._unit * p ** (other._val - v0)) % p**window
        if total == 0:
            return PadicScalar._capped_zero(p, abs_prec)
        shift = int_valuation(total, p)
        return PadicScalar._capped(p, v0 + shift, total // p**shift, window - shift)

    def __neg__(self) -> "PadicScalar":
        if self.backend == EXACT:
            return PadicScalar._exact(-self._frac, self.prime)
        if self.is_zero:
            return self
        modulus = self.prime**self._rel
        return PadicScalar._capped(self.prime, self._val, (-self._unit) % modulus, self._rel)

    def __sub__(self, other: "PadicScalar") -> "PadicScalar":
        return self + (-other)

    def __mul__(self, other: "PadicScalar") -> "PadicScalar":
        self._require_compatible(other)
        p = self.prime
        if self.backend == EXACT:
            return PadicScalar._exact(self._frac * other._frac, p)
        if self.is_exact_zero or other.is_exact_zero:
            return PadicScalar._capped_zero(p, POS_INF)
        if self.is_zero or other.is_zero:
            # |xy| <= p^-(bound_x + bound_y); valuation stands in for the bound.
            bx = self._zero_abs if self.is_zero else self._val
            by = other._zero_abs if other.is_zero else other._val
            return PadicScalar._capped_zero(p, bx + by)
        rel = min(self._rel, other._rel)
        unit = self._unit * other._unit % p**rel
        return PadicScalar._capped(p, self._val + other._val, unit, rel)

    def invert(self) -> "PadicScalar":
        if self.is_zero:
            raise SingularElementError("cannot invert zero (or zero to working precision)")
        if self.backend == EXACT:
            return PadicScalar._exact(1 / self._frac, self.prime)
        modulus = self.prime**self._rel
        return PadicScalar._capped(self.prime, -self._val,
                                   pow(self._unit, -1, modulus), self._rel)

    def __truediv__(self, other: "PadicScalar") -> "PadicScalar":
        self._require_compatible(other)
        return self * other.invert()

    def __pow__(self, n: int) -> "PadicScalar":
        if not isinstance(n, int):
            raise InvalidInputError("exponent must be an integer")
        base = self if n >= 0 else self.invert()
        n = abs(n)
        result = PadicScalar.one(self.prime, self.backend,
                                 self._rel if self.backend == CAPPED and not self.is_zero
                                 else DEFAULT_DIGITS)
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- comparison ----------------------------------------------------

    def __eq__(self, other: object) -> bool:
        """Structural equality (same backend, same known digits and precision)."""
        if not isinstance(other, PadicScalar):
            return NotImplemented
        if self.prime != other.prime or self.backend != other.backend:
            return False
        if self.backend == EXACT:
            return self._frac == other._frac
        return (self._val == other._val and self._unit == other._unit
                and self._rel == other._rel and self._zero_abs == other._zero_abs)

    def __hash__(self) -> int:
        if self.backend == EXACT:
            return hash((self.prime, self._frac))
        return hash((self.prime, self._val, self._unit, self._rel, self._zero_abs))

    def agrees(self, other: "PadicScalar") -> bool:
        """True when the two values coincide on every digit both sides know."""
        if self.prime != other.prime:
            return False
        a, b = self, other
        if a.backend == EXACT and b.backend == EXACT:
            return a._frac == b._frac
        prec = min(a.absolute_precision, b.absolute_precision)
        if prec == POS_INF:
            return (a.lift_exact() - b.lift_exact()).is_zero
        diff = a.lift_exact() - b.lift_exact()
        return diff.valuation >= prec

    def __repr__(self) -> str:
        if self.backend == EXACT:
            return f"PadicScalar({self._frac}, p={self.prime})"
        if self.is_exact_zero:
            return f"PadicScalar(0, p={self.prime}, capped)"
        if self.is_zero:
            return f"PadicScalar(O({self.prime}^{self._zero_abs}), capped)"
        return (f"PadicScalar({self._unit}*{self.prime}^{self._val}"
                f" + O({self.prime}^{self._val + self._rel}), capped)")


def abs_exponent(x: PadicScalar) -> Exponent:
    """Exponent e with |x| = p^e; NEG_INF for exact zero."""
    return x.abs_exponent


def binomial_valuation(k: int, n: int, p: int) -> int:
    """v_p(C(k, n)) as the carry count of adding n and k-n in base p.

    Always >= 0, so |C(k, n)| <= 1 for integers 0 <= n <= k.
    """
    _check_prime(p)
    if n < 0 or n > k:
        raise InvalidInputError(f"need 0 <= n <= k, got n={n} k={k}")
    a, b = n, k - n
    carries = carry = 0
    while a or b or carry:
        s = a % p + b % p + carry
        carry = 1 if s >= p else 0
        carries += carry
        a //= p
        b //= p
    return carries
