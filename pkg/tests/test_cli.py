"""CLI behaviour: golden reports, exit-code contract, generate/check pipeline."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from padic_resolvent.cli import WORKED_INSTANCES, main

GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.parametrize("name", [name for name, _ in WORKED_INSTANCES])
def test_golden_reports_byte_identical(name, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    code = main(["check", "--spec", str(GOLDEN / f"{name}.spec.json"),
                 "--report", str(report_path)])
    assert code == 0
    assert report_path.read_bytes() == (GOLDEN / f"{name}.report.json").read_bytes()
    out = capsys.readouterr().out
    assert "agreement: True" in out


@pytest.mark.parametrize("name", [name for name, _ in WORKED_INSTANCES])
def test_golden_specs_regenerate(name, tmp_path):
    params = dict(WORKED_INSTANCES)[name]
    args = ["generate", "--kind", params["kind"], "--prime", str(params["prime"]),
            "--seed", str(params["seed"]), "--out", str(tmp_path / "spec.json")]
    if "dim" in params:
        args += ["--dim", str(params["dim"])]
    if "eigen" in params:
        args += ["--eigen", params["eigen"]]
    if "entries" in params:
        args += ["--entries", ",".join(params["entries"])]
    if "superdiagonal" in params:
        args += ["--superdiagonal", ",".join(params["superdiagonal"])]
    if "omega" in params:
        args += ["--omega", params["omega"]]
    assert main(args) == 0
    assert (tmp_path / "spec.json").read_bytes() == \
        (GOLDEN / f"{name}.spec.json").read_bytes()


def test_exit_code_one_on_residual_finding(tmp_path):
    spec = json.loads((GOLDEN / "jordan-block.spec.json").read_text())
    spec["backend"] = "capped"
    spec["slack"] = 0
    path = tmp_path / "tight.json"
    path.write_text(json.dumps(spec))
    report_path = tmp_path / "report.json"
    code = main(["check", "--spec", str(path), "--report", str(report_path)])
    assert code == 1
    payload = json.loads(report_path.read_text())
    assert payload["exit_code"] == 1
    assert any("residual failure" in f for f in payload["findings"])


def test_exit_code_two_on_invalid_spec(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"prime": 2, "matrix": [["1", "1/0"], ["0", "1"]]}))
    assert main(["check", "--spec", str(bad)]) == 2
    assert "rejected" in capsys.readouterr().err

    hypo = tmp_path / "hypo.json"
    hypo.write_text(json.dumps({"prime": 2, "matrix": [["1/2"]],
                                "declared_radius_exponent": 0}))
    assert main(["check", "--spec", str(hypo)]) == 2
    assert "not certified" in capsys.readouterr().err

    assert main(["check", "--spec", str(tmp_path / "missing.json")]) == 2


def test_generate_then_check_pipeline(tmp_path):
    spec_path = tmp_path / "spec.json"
    assert main(["generate", "--kind", "random_bounded", "--dim", "3",
                 "--prime", "3", "--seed", "9", "--out", str(spec_path)]) == 0
    report_path = tmp_path / "report.json"
    assert main(["check", "--spec", str(spec_path),
                 "--report", str(report_path)]) == 0
    payload = json.loads(report_path.read_text())
    assert payload["agreement"] is True


def test_check_overrides_apply(tmp_path):
    report_path = tmp_path / "report.json"
    code = main(["check", "--spec", str(GOLDEN / "jordan-block.spec.json"),
                 "--report", str(report_path), "--n-max", "6", "--seed", "42"])
    assert code == 0
    payload = json.loads(report_path.read_text())
    assert payload["input"]["n_max"] == 6
    assert payload["input"]["seed"] == 42


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 3


def test_generate_rejects_bad_kind_params(capsys):
    assert main(["generate", "--kind", "jordan"]) == 2
    assert "error" in capsys.readouterr().err
