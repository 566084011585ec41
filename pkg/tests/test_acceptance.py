"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import json
import time

import numpy as np
import pytest

import test_elimination as elim_suite
import test_poly as poly_suite
import test_puiseux as puiseux_suite
from conftest import FIXTURE_NAMES, fixture_path, hybrid_report
from instances import convex_quadratic_on_polyhedron, small_polynomial_problem
from tangent_inf.oracle import OracleConfig, minimize_global
from tangent_inf.pipeline import PipelineError, RunConfig, run
from tangent_inf.report import dumps
from tangent_inf.verdict import YES


@pytest.fixture
def verdict_line(capsys):
    """Print one line per criterion straight to the terminal, pass or fail."""
    lines = []

    def record(number, title, ok, detail=""):
        lines.append(f"ACCEPTANCE {number} {title}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else ""))
        return ok

    yield record
    with capsys.disabled():
        for line in lines:
            print("\n" + line)


def timed_run(name):
    start = time.perf_counter()
    report = run(RunConfig(input=fixture_path(name)))
    return report, time.perf_counter() - start


def counted_branches(report):
    return [b for b in report.data["branches"] if b["counted"]]


def value_of(entry):
    return entry["value"]


def test_example1(verdict_line):
    r, secs = timed_run("example1")
    v = r.data["verdicts"]
    branches = counted_branches(r)
    shapes = sorted((b["alpha"], b["leading_coeff"].get("exact"), b["series"]) for b in branches)
    checks = {
        "coercive": value_of(v["coercive"]) is True,
        "attained": value_of(v["attains_infimum"]) is True,
        "compact": value_of(v["solution_set_compact"]) == YES,
        "value 0": v["optimal_value"].get("exact") == "0",
        "limits +inf": all(b["lambda"] == {"infinite": "+inf"} for b in branches),
        "leading terms": shapes == [("1", "1", "1*t^1"), ("2", "1", "1*t^2"), ("2", "1", "1*t^2 + 0.25*t^0")],
        "runtime": secs <= 30,
    }
    bad = [k for k, ok in checks.items() if not ok]
    assert verdict_line(1, "Example 1", not bad, f"{secs:.1f} s" + (f"; failed {bad}" if bad else ""))


def test_example2(verdict_line):
    r, secs = timed_run("example2")
    v = r.data["verdicts"]
    branches = counted_branches(r)
    coeffs = sorted(b["leading_coeff"]["approx"] for b in branches)
    checks = {
        "unbounded": value_of(v["bounded_below"]) is False,
        "value -inf": v["optimal_value"].get("infinite") == "-inf",
        "two branches": len(branches) == 2 and all(b["alpha"] == "1" for b in branches),
        "a = -sqrt2, +sqrt2": len(coeffs) == 2 and abs(coeffs[0] + 2**0.5) < 1e-12 and abs(coeffs[1] - 2**0.5) < 1e-12,
        "minpoly a^2 - 2": all(b["leading_coeff"].get("minpoly") == [-2, 0, 1] for b in branches),
        "runtime": secs <= 10,
    }
    bad = [k for k, ok in checks.items() if not ok]
    assert verdict_line(2, "Example 2", not bad, f"{secs:.1f} s" + (f"; failed {bad}" if bad else ""))


def test_example3(verdict_line):
    r, secs = timed_run("example3")
    v = r.data["verdicts"]
    crit = sorted(c["value"].get("exact") for c in r.data["critical_values"] if c["counted"])
    elim = r.data["meta"]["elimination"]
    fallbacks = sum(s["curve"]["budget_failures"] for s in elim.values())
    finished = all(s["curve"]["resultant_components"] > 0 for s in elim.values() if s["curve"]["budget_failures"])
    checks = {
        "bounded": value_of(v["bounded_below"]) is True,
        "not attained": value_of(v["attains_infimum"]) is False,
        "not coercive": value_of(v["coercive"]) is False,
        "value 0": v["optimal_value"].get("exact") == "0",
        "critical values {1}": crit == ["1"],
        "branch with limit 0": any(b["lambda"].get("exact") == "0" for b in counted_branches(r)),
        "fallback completed": finished,
        "runtime": secs <= 300,
    }
    bad = [k for k, ok in checks.items() if not ok]
    detail = f"{secs:.1f} s, {fallbacks} Groebner budget fallback(s)" + (f"; failed {bad}" if bad else "")
    assert verdict_line(3, "Example 3", not bad, detail)


def test_frank_wolfe(verdict_line):
    rng = np.random.default_rng(7)
    bounded = problems = 0
    failures = []
    for k in range(20):
        p = convex_quadratic_on_polyhedron(rng)
        r = run(RunConfig(problem=p))
        v = r.verdict
        if not v.bounded_below:
            continue
        bounded += 1
        if not v.attains_infimum:
            failures.append(f"#{k} bounded but not attained")
            continue
        exact = float(v.optimal_value)
        best = minimize_global(p, OracleConfig())
        if best is None or abs(best[0] - exact) > 1e-4 * max(1.0, abs(exact)):
            failures.append(f"#{k} oracle {best and best[0]} vs exact {exact}")
        problems += 1
    ok = not failures
    assert verdict_line(4, "Frank-Wolfe quadratics", ok, f"{bounded}/20 bounded, all attained and matched" if ok else "; ".join(failures))


def test_oracle_symbolic_consistency(verdict_line):
    failures = []
    for name in FIXTURE_NAMES:
        r = hybrid_report(name)
        for row in r.data["meta"]["consistency"]["psi_vs_branches"]:
            if abs(row["branch_min"] - row["psi"]) > 1e-3 * (1 + abs(row["psi"])):
                failures.append(f"{name} t={row['t']:g}")
        v = r.data["verdicts"]
        ov = v["optimal_value"]
        if not value_of(v["attains_infimum"]) and "infinite" not in ov:
            psi = r.data["psi_samples"][-1]["psi"]
            if abs(psi - ov["approx"]) > 1e-2 * (1 + abs(ov["approx"])):
                failures.append(f"{name} psi {psi} vs value {ov['approx']}")
    assert verdict_line(5, "oracle-symbolic consistency", not failures, "; ".join(failures))


def _run_suite(fn, *args):
    try:
        fn(*args)
    except pytest.skip.Exception:
        return None
    return True


def test_exact_algebra(verdict_line):
    failures = []
    for label, comp, n_elim in elim_suite.FIXTURE_COMPONENTS:
        try:
            _run_suite(elim_suite.test_fixture_bases_satisfy_buchberger, label, comp, n_elim)
        except AssertionError:
            failures.append(f"Buchberger {label}")
    for name, label in elim_suite._route_pairs():
        try:
            elim_suite.test_groebner_and_resultant_routes_agree(name, label)
        except AssertionError:
            failures.append(f"routes {name} {label}")
    for text in puiseux_suite.RESIDUAL_CURVES:
        try:
            puiseux_suite.test_residual_order(text)
        except AssertionError:
            failures.append(f"residual order {text}")
    for fn in (
        poly_suite.test_addition_is_associative,
        poly_suite.test_multiplication_distributes,
        poly_suite.test_multiplication_commutes,
        poly_suite.test_no_stored_zero_coefficients,
        poly_suite.test_gradient_matches_central_difference,
    ):
        try:
            fn()
        except AssertionError:
            failures.append(fn.__name__)
    assert verdict_line(6, "exact-algebra suites", not failures, "; ".join(failures))


def _lattice_violations(v):
    out = []
    if v.coercive and not v.attains_infimum:
        out.append("coercive but not attained")
    if v.attains_infimum and not v.bounded_below:
        out.append("attained but unbounded")
    if v.solution_set_compact == YES and not v.attains_infimum:
        out.append("compact but not attained")
    return out


def test_verdict_lattice(verdict_line):
    failures = []
    for name in FIXTURE_NAMES:
        failures += [f"{name}: {m}" for m in _lattice_violations(hybrid_report(name).verdict)]
    quad, poly = np.random.default_rng(11), np.random.default_rng(12)
    for k in range(50):
        p = convex_quadratic_on_polyhedron(quad) if k % 2 == 0 else small_polynomial_problem(poly)
        try:
            v = run(RunConfig(problem=p)).verdict
        except PipelineError as exc:
            failures.append(f"instance {k}: no verdict ({exc})")
            continue
        failures += [f"instance {k}: {m}" for m in _lattice_violations(v)]
    assert verdict_line(7, "verdict lattice", not failures, "; ".join(failures) or "5 fixtures + 50 random instances")


def test_determinism(verdict_line):
    failures = []
    for name in FIXTURE_NAMES:
        first = hybrid_report(name).without_timing()
        again = run(RunConfig(input=fixture_path(name))).without_timing()
        if dumps(first) != dumps(again):
            failures.append(name)
    assert verdict_line(8, "determinism", not failures, "; ".join(failures))
