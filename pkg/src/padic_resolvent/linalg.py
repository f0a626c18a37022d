"""Dense square matrices over Q_p, ultrametric operator norms, and the
weighted-seminorm model of the locally convex structure.

The operator norm for the sup norm on Q_p^d is the maximum entry absolute
value, so every norm in this module is an integer exponent (or -inf).
The characteristic polynomial is computed division-free (Berkowitz) on the
exact backend; integrality of its coefficients is the power-boundedness
oracle that certifies semigroup-level statements about finite power checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InvalidInputError
from .scalar import (
    CAPPED,
    DEFAULT_DIGITS,
    EXACT,
    Exponent,
    NEG_INF,
    POS_INF,
    PadicScalar,
    fraction_valuation,
)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise InvalidInputError(f"cannot interpret {value!r} as a rational")


class PadicMatrix:
    """A d x d matrix of PadicScalar sharing one prime and backend."""

    __slots__ = ("prime", "backend", "dim", "rows")

    def __init__(self, rows: Sequence[Sequence[PadicScalar]]):
        dim = len(rows)
        if dim == 0 or any(len(r) != dim for r in rows):
            raise InvalidInputError("matrix must be square and nonempty")
        first = rows[0][0]
        for r in rows:
            for x in r:
                if not isinstance(x, PadicScalar):
                    raise InvalidInputError("entries must be PadicScalar")
                if x.prime != first.prime or x.backend != first.backend:
                    raise InvalidInputError("entries must share one prime and backend")
        object.__setattr__(self, "prime", first.prime)
        object.__setattr__(self, "backend", first.backend)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "rows", tuple(tuple(r) for r in rows))

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("PadicMatrix is immutable")

    # -- construction ---------------------------------------------------

    @classmethod
    def from_rationals(cls, entries: Sequence[Sequence], p: int,
                       backend: str = EXACT, digits: int = DEFAULT_DIGITS) -> "PadicMatrix":
        rows = [
            [PadicScalar.from_fraction(_as_fraction(v), p, backend, digits) for v in row]
            for row in entries
        ]
        return cls(rows)

    @classmethod
    def identity(cls, dim: int, p: int, backend: str = EXACT,
                 digits: int = DEFAULT_DIGITS) -> "PadicMatrix":
        return cls.from_rationals(
            [[1 if i == j else 0 for j in range(dim)] for i in range(dim)],
            p, backend, digits)

    @classmethod
    def zeros(cls, dim: int, p: int, backend: str = EXACT,
              digits: int = DEFAULT_DIGITS) -> "PadicMatrix":
        return cls.from_rationals([[0] * dim for _ in range(dim)], p, backend, digits)

    @classmethod
    def diagonal(cls, values: Sequence, p: int, backend: str = EXACT,
                 digits: int = DEFAULT_DIGITS) -> "PadicMatrix":
        dim = len(values)
        return cls.from_rationals(
            [[values[i] if i == j else 0 for j in range(dim)] for i in range(dim)],
            p, backend, digits)

    # -- plumbing ---------------------------------------------------------

    def entry(self, i: int, j: int) -> PadicScalar:
        return self.rows[i][j]

    def _require_compatible(self, other: "PadicMatrix") -> None:
        if not isinstance(other, PadicMatrix):
            raise InvalidInputError(f"expected PadicMatrix, got {type(other).__name__}")
        if (self.prime, self.backend, self.dim) != (other.prime, other.backend, other.dim):
            raise InvalidInputError("matrices must share prime, backend and dimension")

    def _coerce_scalar(self, value) -> PadicScalar:
        if isinstance(value, PadicScalar):
            if value.prime != self.prime or value.backend != self.backend:
                raise InvalidInputError("scalar must share the matrix prime and backend")
            return value
        digits = self._working_digits()
        return PadicScalar.from_fraction(_as_fraction(value), self.prime, self.backend, digits)

    def _working_digits(self) -> int:
        if self.backend == EXACT:
            return DEFAULT_DIGITS
        rels = [x.relative_precision for row in self.rows for x in row if not x.is_zero]
        return int(max(rels)) if rels else DEFAULT_DIGITS

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "PadicMatrix") -> "PadicMatrix":
        self._require_compatible(other)
        return PadicMatrix([
            [self.rows[i][j] + other.rows[i][j] for j in range(self.dim)]
            for i in range(self.dim)
        ])

    def __neg__(self) -> "PadicMatrix":
        return PadicMatrix([[-x for x in row] for row in self.rows])

    def __sub__(self, other: "PadicMatrix") -> "PadicMatrix":
        return self + (-other)

    def __matmul__(self, other: "PadicMatrix") -> "PadicMatrix":
        self._require_compatible(other)
        d = self.dim
        cols = [[other.rows[k][j] for k in range(d)] for j in range(d)]
        out = []
        for i in range(d):
            row = self.rows[i]
            out_row = []
            for j in range(d):
                col = cols[j]
                acc = row[0] * col[0]
                for k in range(1, d):
                    acc = acc + row[k] * col[k]
                out_row.append(acc)
            out.append(out_row)
        return PadicMatrix(out)

    def scale(self, value) -> "PadicMatrix":
        c = self._coerce_scalar(value)
        return PadicMatrix([[c * x for x in row] for row in self.rows])

    def apply(self, vector: Sequence[PadicScalar]) -> list[PadicScalar]:
        if len(vector) != self.dim:
            raise InvalidInputError("vector length must equal the matrix dimension")
        out = []
        for i in range(self.dim):
            acc = self.rows[i][0] * vector[0]
            for k in range(1, self.dim):
                acc = acc + self.rows[i][k] * vector[k]
            out.append(acc)
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PadicMatrix):
            return NotImplemented
        return (self.dim == other.dim and self.prime == other.prime
                and self.backend == other.backend and self.rows == other.rows)

    def __hash__(self) -> int:
        return hash((self.prime, self.backend, self.rows))

    def agrees(self, other: "PadicMatrix") -> bool:
        return self.dim == other.dim and all(
            self.rows[i][j].agrees(other.rows[i][j])
            for i in range(self.dim) for j in range(self.dim))

    def is_zero(self) -> bool:
        return all(x.is_zero for row in self.rows for x in row)

    def lift_exact(self) -> "PadicMatrix":
        return PadicMatrix([[x.lift_exact() for x in row] for row in self.rows])

    def to_capped(self, digits: int = DEFAULT_DIGITS) -> "PadicMatrix":
        return PadicMatrix([[x.to_capped(digits) for x in row] for row in self.rows])

    def __repr__(self) -> str:
        body = "; ".join(
            ", ".join(repr(x.representative()) if x.backend == CAPPED else str(x.to_fraction())
                      for x in row)
            for row in self.rows)
        return f"PadicMatrix[{body}] (p={self.prime}, {self.backend})"


def mat_pow(a: PadicMatrix, n: int) -> PadicMatrix:
    """A^n by repeated squaring; A^0 = I."""
    if n < 0:
        raise InvalidInputError("matrix power requires n >= 0")
    result = PadicMatrix.identity(a.dim, a.prime, a.backend, a._working_digits())
    base = a
    while n:
        if n & 1:
            result = result @ base
        n >>= 1
        if n:
            base = base @ base
    return result


def norm_exponent(a: PadicMatrix) -> Exponent:
    """e with ||A|| = p^e under the sup operator norm (max entry size)."""
    return max((x.abs_exponent for row in a.rows for x in row), default=NEG_INF)


def column_norm_exponent(a: PadicMatrix, j: int) -> Exponent:
    """||A e_j|| as an exponent: the norm is attained on basis vectors."""
    return max(a.rows[i][j].abs_exponent for i in range(a.dim))


def power_norm_profile(a: PadicMatrix, k_max: int) -> list[Exponent]:
    """[||A^0||, ..., ||A^k_max||] as exponents, computed iteratively."""
    if k_max < 0:
        raise InvalidInputError("k_max must be >= 0")
    profile: list[Exponent] = [0]
    power = PadicMatrix.identity(a.dim, a.prime, a.backend, a._working_digits())
    for _ in range(k_max):
        power = power @ a
        profile.append(norm_exponent(power))
        if power.is_zero() and a.backend == EXACT:
            profile.extend([NEG_INF] * (k_max - len(profile) + 1))
            break
    return profile


# -- characteristic polynomial -----------------------------------------


def char_poly(a: PadicMatrix) -> list[Fraction]:
    """Coefficients of det(xI - A), ascending, monic of degree d.

    Division-free (Berkowitz), so valid over any exact coefficient ring;
    capped inputs are lifted to their exact digit representatives first.
    """
    m = [[x.lift_exact().to_fraction() for x in row] for row in a.rows]
    d = a.dim
    # poly vector for the leading 1x1 block, highest-degree coefficient first
    vec = [Fraction(1), -m[0][0]]
    for k in range(1, d):
        row = m[k][:k]
        col = [m[i][k] for i in range(k)]
        # first column of the Toeplitz transform: 1, -a_kk, -R S, -R M S, ...
        toeplitz_col = [Fraction(1), -m[k][k]]
        iterate = col
        for _ in range(k):
            toeplitz_col.append(-sum(row[i] * iterate[i] for i in range(k)))
            iterate = [sum(m[i][j] * iterate[j] for j in range(k)) for i in range(k)]
        new_vec = [Fraction(0)] * (k + 2)
        for i in range(k + 2):
            for j in range(len(vec)):
                shift = i - j
                if 0 <= shift < len(toeplitz_col):
                    new_vec[i] += toeplitz_col[shift] * vec[j]
        vec = new_vec
    return list(reversed(vec))


def char_poly_minors(a: PadicMatrix) -> list[Fraction]:
    """Oracle route: det(xI - A) by cofactor expansion over Q[x] (small d)."""
    d = a.dim
    entries = [[x.lift_exact().to_fraction() for x in row] for row in a.rows]
    # polynomial entries of xI - A as ascending coefficient lists
    poly = [[[(Fraction(1) if k == 1 else Fraction(0)) if i == j else Fraction(0)
              for k in range(2)] for j in range(d)] for i in range(d)]
    for i in range(d):
        for j in range(d):
            poly[i][j][0] = -entries[i][j]

    def p_add(u, v):
        n = max(len(u), len(v))
        return [(u[i] if i < len(u) else 0) + (v[i] if i < len(v) else 0) for i in range(n)]

    def p_mul(u, v):
        out = [Fraction(0)] * (len(u) + len(v) - 1)
        for i, ui in enumerate(u):
            if ui:
                for j, vj in enumerate(v):
                    out[i + j] += ui * vj
        return out

    def det(mat):
        n = len(mat)
        if n == 1:
            return mat[0][0]
        acc = [Fraction(0)]
        for j in range(n):
            minor = [r[:j] + r[j + 1:] for r in mat[1:]]
            term = p_mul(mat[0][j], det(minor))
            if j % 2:
                term = [-c for c in term]
            acc = p_add(acc, term)
        return acc

    coeffs = det(poly)
    coeffs += [Fraction(0)] * (d + 1 - len(coeffs))
    return coeffs


def power_bounded_oracle(a: PadicMatrix) -> str:
    """"bounded" iff every characteristic coefficient has valuation >= 0.

    Integral coefficients put all eigenvalues in the closed unit ball (the
    slopes of the coefficient Newton polygon are all >= 0), which over a
    p-adic field bounds sup_n ||A^n|| because binomials have |C(n,j)| <= 1.
    """
    p = a.prime
    for c in char_poly(a)[:-1]:
        if c != 0 and fraction_valuation(c, p) < 0:
            return "unbounded"
    return "bounded"


def newton_slopes(coeffs: Sequence[Fraction], p: int) -> list[Fraction]:
    """Root valuations of a monic polynomial from its Newton polygon.

    coeffs ascending; each returned valuation is repeated with multiplicity.
    """
    d = len(coeffs) - 1
    if d < 1 or coeffs[-1] != 1:
        raise InvalidInputError("need a monic polynomial of degree >= 1")
    points = [(i, fraction_valuation(c, p)) for i, c in enumerate(coeffs) if c != 0]
    # lower convex hull, left to right
    hull: list[tuple[int, Exponent]] = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    out: list[Fraction] = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slope = Fraction(y2 - y1, x2 - x1)
        out.extend([-slope] * (x2 - x1))
    # vanished low coefficients mean zero roots of valuation +inf; callers
    # only need finite slopes, so pad is left out by design
    return out


# -- seminorm families ---------------------------------------------------


@dataclass(frozen=True)
class SeminormFamily:
    """Finite family of weighted sup seminorms on Q_p^d.

    Each member is a weight vector of exponents (int, or NEG_INF for a
    coordinate with weight zero); the seminorm is
    p_w(x) = max_i p^(w_i) |x_i|.
    """

    dim: int
    members: tuple[tuple[Exponent, ...], ...]

    def __post_init__(self) -> None:
        if self.dim < 1 or not self.members:
            raise InvalidInputError("need dim >= 1 and at least one seminorm")
        for w in self.members:
            if len(w) != self.dim:
                raise InvalidInputError("weight vector length must equal dim")
            for e in w:
                if e != NEG_INF and not isinstance(e, int):
                    raise InvalidInputError("weights are integer exponents or NEG_INF")

    @classmethod
    def sup_norm(cls, dim: int) -> "SeminormFamily":
        return cls(dim, ((0,) * dim,))

    def is_hausdorff(self) -> bool:
        return all(any(w[i] != NEG_INF for w in self.members) for i in range(self.dim))

    def member_eval(self, index: int, vector: Sequence[PadicScalar]) -> Exponent:
        return seminorm_eval(self.members[index], vector)


def seminorm_eval(weights: Sequence[Exponent], vector: Sequence[PadicScalar]) -> Exponent:
    """Exponent of max_i p^(w_i)|x_i|; NEG_INF when every term vanishes."""
    if len(weights) != len(vector):
        raise InvalidInputError("weight/vector length mismatch")
    best: Exponent = NEG_INF
    for e, x in zip(weights, vector):
        if e == NEG_INF:
            continue
        a = x.abs_exponent
        if a == NEG_INF:
            continue
        best = max(best, e + a)
    return best


@dataclass(frozen=True)
class Refutation:
    member_index: int          # the seminorm q that cannot be dominated
    basis_index: int           # failing basis vector e_j
    operator_index: int        # operator T attaining the violation
    needed_scale: Exponent     # smallest s that would have worked for the best p
    best_member_index: int


@dataclass(frozen=True)
class EquiContinuityVerdict:
    """Outcome of the column-criterion equi-continuity check."""

    status: str  # "witnessed" | "refuted"
    witnesses: tuple[tuple[int, int, int], ...] | None  # (q index, p index, scale)
    refutation: Refutation | None

    def __post_init__(self) -> None:
        if (self.witnesses is None) == (self.refutation is None):
            raise InvalidInputError("exactly one of witnesses/refutation must be set")


def equicontinuity_check(operators: Sequence[PadicMatrix], family: SeminormFamily,
                         scaling_budget: int = 40) -> EquiContinuityVerdict:
    """Decide whether one family member p^s-dominates every q over the operators.

    For each member q the needed column exponents are
    c_j = max over operators T and rows i of (w^q_i + |T_ij|-exponent);
    a witness (p, s) requires w^p_j + s >= c_j for all j.  Because the sup
    norm is attained on basis vectors the witness is exact for every x,
    not just the tested set.
    """
    ops = list(operators)
    if not ops:
        raise InvalidInputError("need at least one operator")
    if not family.is_hausdorff():
        raise InvalidInputError("seminorm family must be Hausdorff")
    dim = family.dim
    for t in ops:
        if t.dim != dim:
            raise InvalidInputError("operator dimension must match the family")
    if scaling_budget < 0:
        raise InvalidInputError("scaling budget must be >= 0")

    witnesses: list[tuple[int, int, int]] = []
    for qi, q in enumerate(family.members):
        needed_cols: list[Exponent] = []
        for j in range(dim):
            c: Exponent = NEG_INF
            for t in ops:
                for i in range(dim):
                    if q[i] == NEG_INF:
                        continue
                    a = t.rows[i][j].abs_exponent
                    if a != NEG_INF:
                        c = max(c, q[i] + a)
            needed_cols.append(c)

        best_pi, best_need = -1, None
        for pi, p_w in enumerate(family.members):
            need: Exponent = NEG_INF
            feasible = True
            for j, c in enumerate(needed_cols):
                if c == NEG_INF:
                    continue
                if p_w[j] == NEG_INF:
                    feasible = False
                    break
                need = max(need, c - p_w[j])
            if not feasible:
                continue
            if best_need is None or need < best_need or (need == best_need and pi == qi):
                best_pi, best_need = pi, need
        if best_need is None:
            best_pi, best_need = qi, POS_INF
        if best_need <= scaling_budget:
            scale = 0 if best_need == NEG_INF else max(int(best_need), -scaling_budget)
            witnesses.append((qi, best_pi, scale))
            continue

        # refuted: report the worst column/operator for the best candidate
        ref_j, ref_t, worst = 0, 0, NEG_INF
        p_w = family.members[best_pi]
        for j, c in enumerate(needed_cols):
            if c == NEG_INF:
                continue
            gap = POS_INF if p_w[j] == NEG_INF else c - p_w[j]
            if gap > worst:
                worst = gap
                ref_j = j
        for ti, t in enumerate(ops):
            got = max((q[i] + t.rows[i][ref_j].abs_exponent
                       for i in range(dim)
                       if q[i] != NEG_INF and t.rows[i][ref_j].abs_exponent != NEG_INF),
                      default=NEG_INF)
            if got == needed_cols[ref_j]:
                ref_t = ti
                break
        return EquiContinuityVerdict(
            status="refuted",
            witnesses=None,
            refutation=Refutation(qi, ref_j, ref_t, worst, best_pi),
        )
    return EquiContinuityVerdict(status="witnessed", witnesses=tuple(witnesses),
                                 refutation=None)


