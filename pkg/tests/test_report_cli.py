import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from conftest import FIXTURE_NAMES, fixture_path
from tangent_inf.cli import main
from tangent_inf.oracle import OracleConfig
from tangent_inf.pipeline import EXIT_BUDGET, EXIT_INPUT, EXIT_OK, RunConfig, run
from tangent_inf.report import dumps, psi_csv_text, validate_report

TOP_KEYS = {"problem", "verdicts", "branches", "critical_values", "psi_samples", "caveats", "justifications", "meta"}


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_reports_follow_the_schema(name, reports):
    data = reports(name).data
    assert set(data) == TOP_KEYS
    validate_report(data)
    assert json.loads(dumps(data)) == data


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_every_verdict_is_justified(name, reports):
    data = reports(name).data
    covered = {j["verdict"] for j in data["justifications"]}
    assert covered >= set(data["verdicts"])
    assert all(j["rule"] and j["statement"] for j in data["justifications"])


def test_numeric_mode_is_heuristic():
    r = run(RunConfig(input=fixture_path("example2"), mode="numeric", oracle=OracleConfig(starts=16)))
    validate_report(r.data)
    assert {v["status"] for v in r.data["verdicts"].values()} == {"heuristic"}
    assert r.data["verdicts"]["bounded_below"]["value"] is False


def test_symbolic_mode_runs_without_numerics():
    # no inequalities, so nothing depends on unchecked signs
    r = run(RunConfig(input=fixture_path("example2"), mode="symbolic"))
    validate_report(r.data)
    assert r.data["psi_samples"] == []
    assert r.data["verdicts"]["optimal_value"] == {"infinite": "-inf", "status": "certified"}


def test_symbolic_mode_keeps_sign_violating_branches_conditional():
    # the lifted |y| >= 0 constraint is what rules out the falling branch
    r = run(RunConfig(input=fixture_path("example1"), mode="symbolic"))
    ov = r.data["verdicts"]["optimal_value"]
    assert ov["status"] == "conditional"
    assert any("-1*t^1" in x for x in r.data["verdicts"]["bounded_below"]["conditional_on"])


def test_symbolic_mode_marks_sign_conditions_as_unchecked():
    r = run(RunConfig(input=fixture_path("orthant"), mode="symbolic"))
    statuses = {v["status"] for v in r.data["verdicts"].values()}
    assert statuses == {"conditional"}
    assert any("sign conditions" in c for c in r.data["caveats"])


def test_cli_writes_json_and_csv(tmp_path, capsys):
    out, table = tmp_path / "r.json", tmp_path / "psi.csv"
    code = main(["--input", fixture_path("example2"), "--json", str(out), "--psi-csv", str(table), "--starts", "16"])
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    validate_report(data)
    assert data["verdicts"]["optimal_value"] == {"infinite": "-inf", "status": "certified"}
    rows = list(csv.reader(io.StringIO(table.read_text())))
    assert rows[0] == ["t", "psi", "agreement"] and len(rows) == 1 + len(data["psi_samples"])
    assert "bounded below" in capsys.readouterr().out


def test_csv_text_matches_samples(reports):
    r = reports("example1")
    lines = psi_csv_text(r).splitlines()
    assert lines[0] == "t,psi,agreement"
    assert [float(x.split(",")[1]) for x in lines[1:]] == [s["psi"] for s in r.data["psi_samples"]]


def test_bad_file_exits_with_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.problem"
    bad.write_text("vars: x\nobjective: 2x\n")
    assert main(["--input", str(bad), "--quiet"]) == EXIT_INPUT
    assert "implicit multiplication" in capsys.readouterr().err


def test_missing_file_exits_with_input_error(tmp_path):
    assert main(["--input", str(tmp_path / "nope.problem"), "--quiet"]) == EXIT_INPUT


def test_bad_radii_exit_with_input_error():
    assert main(["--input", fixture_path("example2"), "--radii", "10,20", "--quiet"]) == EXIT_INPUT


def test_budget_exhaustion_exits_with_code_2(capsys):
    code = main(["--input", fixture_path("example1"), "--elimination", "groebner", "--gb-budget", "2", "--quiet"])
    assert code == EXIT_BUDGET
    assert "[elimination]" in capsys.readouterr().err


def test_same_seed_same_bytes(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["--input", fixture_path("orthant"), "--json", str(p), "--quiet", "--starts", "16"]) == EXIT_OK
    a, b = (json.loads(p.read_text()) for p in paths)
    for d in (a, b):
        d["meta"].pop("timing", None)
    assert dumps(a) == dumps(b)


@pytest.mark.skipif(shutil.which("tangent-inf") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(
        ["tangent-inf", "--input", fixture_path("example2"), "--starts", "16"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0 and "optimal value" in proc.stdout


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tangent_inf.cli", "--input", fixture_path("example2"), "--quiet", "--starts", "8"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0 and proc.stdout == ""
