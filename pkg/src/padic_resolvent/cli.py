"""Command line entry points: check, generate, selftest.

Exit codes: 0 all checks pass and the verdicts agree, 1 a genuine finding
(verdict disagreement or identity residual failure), 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import PadicError
from .harness import (
    EXIT_INVALID,
    EXIT_OK,
    instance_spec,
    canonical_bytes,
    parse_spec,
    run_and_report,
)

WORKED_INSTANCES = (
    ("jordan-block", dict(kind="jordan", dim=2, eigen="1", prime=2, seed=1)),
    ("staircase-shift", dict(kind="staircase_shift", superdiagonal=["1/2", "4"],
                             prime=2, seed=2)),
    ("scaled-diagonal", dict(kind="diagonal", entries=["1/2"], omega="1/2",
                             prime=2, seed=3)),
)


def _cmd_check(args: argparse.Namespace) -> int:
    try:
        raw = Path(args.spec).read_bytes()
    except OSError as exc:
        print(f"error: cannot read spec: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        doc = json.loads(raw)
        if not isinstance(doc, dict):
            raise PadicError("spec document must be a JSON object")
        for key, value in (("n_max", args.n_max), ("k_max", args.k_max),
                           ("precision_digits", args.precision), ("seed", args.seed)):
            if value is not None:
                doc[key] = value
        parsed = parse_spec(doc)
        report = run_and_report(parsed)
    except PadicError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_INVALID
    data = report.to_bytes()
    if args.report:
        Path(args.report).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    payload = report.payload
    print(f"oracle: {payload['oracle_verdict']}; "
          f"powers: {payload['verdicts']['powers']['status']}; "
          f"agreement: {payload['agreement']}; "
          f"findings: {len(payload['findings'])}")
    return report.exit_code


def _cmd_generate(args: argparse.Namespace) -> int:
    params: dict = {"kind": args.kind, "prime": args.prime, "seed": args.seed,
                    "backend": args.backend, "digits": args.digits,
                    "slack": args.slack}
    if args.dim is not None:
        params["dim"] = args.dim
    if args.eigen is not None:
        params["eigen"] = args.eigen
    if args.entries is not None:
        params["entries"] = [v.strip() for v in args.entries.split(",")]
    if args.superdiagonal is not None:
        params["superdiagonal"] = [v.strip() for v in args.superdiagonal.split(",")]
    if args.omega is not None:
        params["omega"] = args.omega
    try:
        doc = instance_spec(**params)
    except PadicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    data = canonical_bytes(doc)
    if args.out:
        Path(args.out).write_bytes(data)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(data.decode("utf-8"))
    return EXIT_OK


def _cmd_selftest(_args: argparse.Namespace) -> int:
    worst = EXIT_OK
    for name, params in WORKED_INSTANCES:
        try:
            parsed = parse_spec(instance_spec(**params))
            report = run_and_report(parsed)
        except PadicError as exc:
            print(f"[FAIL] {name}: {exc}")
            worst = max(worst, EXIT_INVALID)
            continue
        ok = report.exit_code == EXIT_OK
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: "
              f"agreement={report.payload['agreement']} "
              f"findings={len(report.payload['findings'])}")
        worst = max(worst, report.exit_code)
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padicres",
        description="Resolvent-based equi-continuity checks for p-adic matrix semigroups.")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="run the checks described by a spec file")
    check.add_argument("--spec", required=True, help="input spec JSON")
    check.add_argument("--report", help="output report path (stdout when omitted)")
    check.add_argument("--n-max", type=int, dest="n_max")
    check.add_argument("--k-max", type=int, dest="k_max")
    check.add_argument("--precision", type=int)
    check.add_argument("--seed", type=int)
    check.set_defaults(func=_cmd_check)

    gen = sub.add_parser("generate", help="write a spec file for a named instance")
    gen.add_argument("--kind", required=True,
                     choices=["random_bounded", "staircase_shift", "jordan", "diagonal"])
    gen.add_argument("--out", help="output spec path (stdout when omitted)")
    gen.add_argument("--dim", type=int)
    gen.add_argument("--prime", type=int, default=2)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--eigen", help="rational eigenvalue for jordan")
    gen.add_argument("--entries", help="comma-separated rationals for diagonal")
    gen.add_argument("--superdiagonal", help="comma-separated rationals for staircase")
    gen.add_argument("--omega", help="scaling element as a rational")
    gen.add_argument("--backend", choices=["exact", "capped"], default="exact")
    gen.add_argument("--digits", type=int, default=64)
    gen.add_argument("--slack", type=int, default=10)
    gen.set_defaults(func=_cmd_generate)

    selftest = sub.add_parser("selftest", help="run the built-in worked instances")
    selftest.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
