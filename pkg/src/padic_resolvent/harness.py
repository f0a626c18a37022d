"""Batch harness: spec documents in, canonical JSON reports out.

Spec and report are JSON with sorted keys; every number crossing the
boundary is an exact rational string or an integer exponent, so reports
are byte-identical across runs and hosts.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from .criteria import (
    STABILITY_HORIZON,
    CheckConfig,
    OperatorSystem,
    VerdictReport,
    default_lambda_grid,
    make_system,
    semigroup_verdict,
)
from .errors import InvalidInputError, SpecParseError
from .linalg import PadicMatrix, SeminormFamily
from .scalar import CAPPED, EXACT, Exponent, NEG_INF, POS_INF, PadicScalar, PrecisionBudget

SPEC_SCHEMA = "padic-resolvent-spec/1"
REPORT_SCHEMA = "padic-resolvent-report/1"
TOOL_NAME = "padic-resolvent"

EXIT_OK = 0
EXIT_FINDING = 1
EXIT_INVALID = 2


def _tool_version() -> str:
    from . import __version__

    return __version__


# -- spec documents -----------------------------------------------------------


@dataclass(frozen=True)
class ParsedSpec:
    system: OperatorSystem
    config: CheckConfig
    seed: int
    digits: int
    slack: int
    backend: str


def _expect(doc: dict, key: str, kind, location: str, default=None, required=False):
    if key not in doc:
        if required:
            raise SpecParseError(f"missing required field '{key}'", location)
        return default
    value = doc[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise SpecParseError(f"field '{key}' must be an integer", f"{location}.{key}")
    if kind is str and not isinstance(value, str):
        raise SpecParseError(f"field '{key}' must be a string", f"{location}.{key}")
    if kind is list and not isinstance(value, list):
        raise SpecParseError(f"field '{key}' must be a list", f"{location}.{key}")
    return value


def _parse_rational(raw, location: str) -> Fraction:
    if isinstance(raw, bool) or isinstance(raw, float):
        raise SpecParseError("rationals must be strings or integers, not floats",
                             location)
    if isinstance(raw, int):
        return Fraction(raw)
    if not isinstance(raw, str):
        raise SpecParseError(f"cannot read rational from {type(raw).__name__}", location)
    try:
        frac = Fraction(raw.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecParseError(f"bad rational {raw!r}: {exc}", location) from None
    return frac


def parse_spec(data: bytes | str | dict) -> ParsedSpec:
    """Parse and validate a spec document into a system plus run config.

    Raises SpecParseError with a field location on malformed input, and
    HypothesisViolationError when the declared domain is not certified.
    """
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SpecParseError(f"not valid JSON: {exc}", "document") from None
    else:
        doc = data
    if not isinstance(doc, dict):
        raise SpecParseError("document must be a JSON object", "document")

    schema = _expect(doc, "schema", str, "spec", default=SPEC_SCHEMA)
    if schema != SPEC_SCHEMA:
        raise SpecParseError(f"unsupported schema {schema!r}", "spec.schema")
    prime = _expect(doc, "prime", int, "spec", required=True)
    if prime < 2:
        raise SpecParseError("prime must be >= 2", "spec.prime")
    backend = _expect(doc, "backend", str, "spec", default=EXACT)
    if backend not in (EXACT, CAPPED):
        raise SpecParseError(f"backend must be 'exact' or 'capped', got {backend!r}",
                             "spec.backend")
    digits = _expect(doc, "precision_digits", int, "spec", default=64)
    slack = _expect(doc, "slack", int, "spec", default=10)
    try:
        budget = PrecisionBudget(digits, slack)
    except InvalidInputError as exc:
        raise SpecParseError(str(exc), "spec.precision_digits") from None

    raw_matrix = _expect(doc, "matrix", list, "spec", required=True)
    dim = len(raw_matrix)
    entries = []
    for i, row in enumerate(raw_matrix):
        if not isinstance(row, list) or len(row) != dim:
            raise SpecParseError("matrix must be square", f"spec.matrix[{i}]")
        entries.append([
            _parse_rational(v, f"spec.matrix[{i}][{j}]") for j, v in enumerate(row)
        ])
    matrix = PadicMatrix.from_rationals(entries, prime, backend, digits)

    omega_frac = _parse_rational(doc.get("omega", "1"), "spec.omega")
    if omega_frac == 0:
        raise SpecParseError("omega must be nonzero", "spec.omega")
    omega = PadicScalar.from_fraction(omega_frac, prime, backend, digits)

    declared = _expect(doc, "declared_radius_exponent", int, "spec")

    weights_raw = _expect(doc, "seminorm_weights", list, "spec")
    if weights_raw is None:
        seminorms = SeminormFamily.sup_norm(dim)
    else:
        members = []
        for i, w in enumerate(weights_raw):
            if not isinstance(w, list) or len(w) != dim:
                raise SpecParseError(f"weight vector must have length {dim}",
                                     f"spec.seminorm_weights[{i}]")
            member = []
            for j, e in enumerate(w):
                if e is None:
                    member.append(NEG_INF)
                elif isinstance(e, bool) or not isinstance(e, int):
                    raise SpecParseError("weights are integers or null",
                                         f"spec.seminorm_weights[{i}][{j}]")
                else:
                    member.append(e)
            members.append(tuple(member))
        try:
            seminorms = SeminormFamily(dim, tuple(members))
        except InvalidInputError as exc:
            raise SpecParseError(str(exc), "spec.seminorm_weights") from None

    system = make_system(matrix, omega=omega, declared_radius_exponent=declared,
                         seminorms=seminorms)

    samples_raw = _expect(doc, "lambda_samples", list, "spec")
    if samples_raw is None:
        samples = default_lambda_grid(system)
    else:
        samples = []
        for i, pair in enumerate(samples_raw):
            loc = f"spec.lambda_samples[{i}]"
            if not isinstance(pair, list) or len(pair) != 2:
                raise SpecParseError("lambda samples are [valuation, unit] pairs", loc)
            m, unit_raw = pair
            if isinstance(m, bool) or not isinstance(m, int):
                raise SpecParseError("sample valuation must be an integer", loc)
            unit = _parse_rational(unit_raw, loc)
            samples.append(PadicScalar.from_fraction(
                unit * Fraction(prime) ** m, prime, backend, digits))
        samples = tuple(samples)

    config = CheckConfig(
        lambda_samples=tuple(samples),
        n_max=_expect(doc, "n_max", int, "spec", default=12),
        k_max=_expect(doc, "k_max", int, "spec", default=200),
        budget=budget,
        scaling_budget=_expect(doc, "scaling_budget", int, "spec", default=40),
    )
    seed = _expect(doc, "seed", int, "spec", default=0)
    return ParsedSpec(system, config, seed, digits, slack, backend)


def _weight_json(seminorms: SeminormFamily) -> list[list[int | None]]:
    return [[None if e == NEG_INF else int(e) for e in w] for w in seminorms.members]


def _sample_pair(lam: PadicScalar) -> list:
    frac = lam.lift_exact().to_fraction()
    m = int(lam.valuation)
    unit = frac / Fraction(lam.prime) ** m
    return [m, str(unit)]


def spec_document(parsed: ParsedSpec) -> dict:
    """Canonical spec dict with all defaults materialized."""
    system, config = parsed.system, parsed.config
    matrix = [[str(x.lift_exact().to_fraction()) for x in row]
              for row in system.matrix.rows]
    return {
        "schema": SPEC_SCHEMA,
        "prime": system.matrix.prime,
        "backend": parsed.backend,
        "precision_digits": parsed.digits,
        "slack": parsed.slack,
        "matrix": matrix,
        "omega": str(system.omega.lift_exact().to_fraction()),
        "declared_radius_exponent": system.declared_radius_exponent,
        "seminorm_weights": _weight_json(system.seminorms),
        "lambda_samples": [_sample_pair(s) for s in config.lambda_samples],
        "n_max": config.n_max,
        "k_max": config.k_max,
        "scaling_budget": config.scaling_budget,
        "seed": parsed.seed,
    }


def canonical_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)
            + "\n").encode("utf-8")


def serialize_spec(parsed: ParsedSpec) -> bytes:
    return canonical_bytes(spec_document(parsed))


# -- instance generation --------------------------------------------------------


def generate_instance(kind: str, *, dim: int | None = None, prime: int = 2,
                      seed: int = 0, eigen=None, entries=None, superdiagonal=None,
                      omega=None, backend: str = EXACT, digits: int = 64,
                      seminorms: SeminormFamily | None = None) -> OperatorSystem:
    """Build a named test instance; seeded, no other entropy source.

    Kinds: random_bounded (entries in Z_p, hence oracle-bounded),
    staircase_shift (given superdiagonal, nilpotent with mixed valuations),
    jordan (single eigenvalue block), diagonal (given entries).
    """
    if kind == "random_bounded":
        if dim is None or dim < 1:
            raise InvalidInputError("random_bounded needs dim >= 1")
        rng = random.Random(seed)
        dens = [n for n in range(1, 12) if n % prime]
        grid = [[Fraction(rng.randint(-9, 9), rng.choice(dens)) for _ in range(dim)]
                for _ in range(dim)]
        matrix = PadicMatrix.from_rationals(grid, prime, backend, digits)
    elif kind == "staircase_shift":
        if superdiagonal is None or not superdiagonal:
            raise InvalidInputError("staircase_shift needs a superdiagonal list")
        vals = [Fraction(v) for v in superdiagonal]
        d = len(vals) + 1
        grid = [[vals[i] if j == i + 1 else Fraction(0) for j in range(d)]
                for i in range(d)]
        matrix = PadicMatrix.from_rationals(grid, prime, backend, digits)
    elif kind == "jordan":
        if dim is None or dim < 1 or eigen is None:
            raise InvalidInputError("jordan needs dim >= 1 and an eigenvalue")
        ev = Fraction(eigen)
        grid = [[ev if i == j else (Fraction(1) if j == i + 1 else Fraction(0))
                 for j in range(dim)] for i in range(dim)]
        matrix = PadicMatrix.from_rationals(grid, prime, backend, digits)
    elif kind == "diagonal":
        if not entries:
            raise InvalidInputError("diagonal needs a nonempty entry list")
        matrix = PadicMatrix.diagonal([Fraction(v) for v in entries], prime,
                                      backend, digits)
    else:
        raise InvalidInputError(f"unknown instance kind {kind!r}")
    omega_scalar = None
    if omega is not None:
        omega_scalar = PadicScalar.from_fraction(Fraction(omega), prime, backend, digits)
    return make_system(matrix, omega=omega_scalar, seminorms=seminorms)


def instance_spec(kind: str, *, seed: int = 0, digits: int = 64, slack: int = 10,
                  backend: str = EXACT, n_max: int = 12, k_max: int = 200,
                  scaling_budget: int = 40, **params) -> dict:
    """Spec document for a generated instance (what `generate` writes)."""
    system = generate_instance(kind, seed=seed, backend=backend, digits=digits,
                               **params)
    config = CheckConfig(lambda_samples=default_lambda_grid(system), n_max=n_max,
                         k_max=k_max, budget=PrecisionBudget(digits, slack),
                         scaling_budget=scaling_budget)
    parsed = ParsedSpec(system, config, seed, digits, slack, backend)
    return spec_document(parsed)


# -- reports ---------------------------------------------------------------------


@dataclass(frozen=True)
class ReportDocument:
    payload: dict
    exit_code: int

    def to_bytes(self) -> bytes:
        return canonical_bytes(self.payload)


def _enc_exp(e: Exponent):
    if e == NEG_INF:
        return "-inf"
    if e == POS_INF:
        return "+inf"
    return int(e)


def _enc_verdict(v) -> dict:
    if v.status == "witnessed":
        return {
            "status": "witnessed",
            "witnesses": [[q, p, s] for q, p, s in v.witnesses],
        }
    ref = v.refutation
    return {
        "status": "refuted",
        "refutation": {
            "seminorm_index": ref.member_index,
            "basis_index": ref.basis_index,
            "operator_index": ref.operator_index,
            "needed_scale": _enc_exp(ref.needed_scale),
            "best_member_index": ref.best_member_index,
        },
    }


def _findings(report: VerdictReport) -> list[str]:
    found = []
    if not report.agreement:
        found.append(
            "verdict disagreement: powers={} regularized={} increment={}".format(
                report.powers_verdict.status, report.regularized_verdict.status,
                report.increment_verdict.status))
    for rec in report.residuals:
        if not rec.passed:
            found.append(
                f"residual failure: {rec.check} lambda={rec.lambda_repr} "
                f"order={rec.order} exponent={_enc_exp(rec.exponent)}")
    if report.bound_stable is False:
        found.append("certificate instability: power norms grow past the horizon")
    if report.forward_bound_holds is False:
        found.append("forward bound violated: criterion norm exceeds the power bound")
    found.extend(report.errors)
    return found


def run_and_report(parsed: ParsedSpec) -> ReportDocument:
    """Run the verdict pipeline and assemble the canonical report."""
    report = semigroup_verdict(parsed.system, parsed.config)
    findings = _findings(report)
    exit_code = EXIT_OK if report.clean else EXIT_FINDING
    system, config = parsed.system, parsed.config
    payload = {
        "schema": REPORT_SCHEMA,
        "tool": {"name": TOOL_NAME, "version": _tool_version()},
        "input": {
            "digest_sha256": hashlib.sha256(serialize_spec(parsed)).hexdigest(),
            "prime": system.matrix.prime,
            "backend": parsed.backend,
            "dim": system.matrix.dim,
            "omega": str(system.omega.lift_exact().to_fraction()),
            "declared_radius_exponent": system.declared_radius_exponent,
            "n_max": config.n_max,
            "k_max": config.k_max,
            "seed": parsed.seed,
        },
        "oracle_verdict": report.oracle_verdict,
        "verdicts": {
            "powers": _enc_verdict(report.powers_verdict),
            "regularized_family": _enc_verdict(report.regularized_verdict),
            "increment_family": _enc_verdict(report.increment_verdict),
        },
        "grids": {
            "powers_norms": [[n, _enc_exp(e)] for n, e in report.powers_norms],
            "regularized_family": [
                [g.lambda_repr, g.n, _enc_exp(g.norm_exponent)]
                for g in report.regularized_grid
            ],
            "increment_family": [
                [g.lambda_repr, g.n, _enc_exp(g.norm_exponent)]
                for g in report.increment_grid
            ],
        },
        "residuals": [
            {
                "check": rec.check,
                "lambda": rec.lambda_repr,
                "order": rec.order,
                "exponent": _enc_exp(rec.exponent),
                "passed": rec.passed,
            }
            for rec in report.residuals
        ],
        "certificate": (
            None if report.bound_constant_exponent is None else {
                "bound_constant_exponent": _enc_exp(report.bound_constant_exponent),
                "stable_through": max(config.k_max, STABILITY_HORIZON),
                "stable": report.bound_stable,
                "forward_bound_holds": report.forward_bound_holds,
            }
        ),
        "agreement": report.agreement,
        "findings": findings,
        "exit_code": exit_code,
    }
    return ReportDocument(payload, exit_code)
