import math

import pytest

from conftest import FIXTURE_NAMES
from tangent_inf.asymptotics import (
    branch_limit,
    certify_branches,
    fit_leading_term,
    validate_radii,
)
from tangent_inf.oracle import OracleConfig, sample_psi
from tangent_inf.poly import parse_poly
from tangent_inf.problem import load_problem, make_problem
from tangent_inf.puiseux import puiseux_branches
from tangent_inf.systems import ActiveSet

from conftest import fixture_path

RADII = [1e2, 1e3, 1e4]


def branches_of(text):
    return puiseux_branches(parse_poly(text, ("u", "v")))


def counted(report):
    return [b for b in report.data["branches"] if b["counted"]]


# -- limits --------------------------------------------------------------------------

def test_limit_of_the_falling_ray():
    neg = min((b for b in branches_of("v^2 - 2*u") if b.is_real), key=lambda b: b.leading.to_mpf(20))
    assert branch_limit(neg).describe() == "-inf"


def test_limit_of_a_decaying_branch():
    pos = max(branches_of("u*v^2 - 1"), key=lambda b: b.leading.to_mpf(20))
    assert branch_limit(pos).describe() == "0"


def test_limit_reads_the_constant_term():
    (b,) = branches_of("4*u - 4*v + 1")
    assert b.alpha == 2 and branch_limit(b).describe() == "+inf"
    (c,) = branches_of("2*v - 3 + v*u - u")
    assert c.alpha == 0 and branch_limit(c).describe() == "1"


def test_example3_bounded_branch_tends_to_zero(reports):
    lams = {b["series"]: b["lambda"] for b in counted(reports("example3"))}
    decaying = [lam for s, lam in lams.items() if s.startswith("1*t^-1")]
    assert decaying == [{"exact": "0", "approx": 0.0}]


# -- numeric fit ---------------------------------------------------------------------

GRID = [10.0 * 10 ** (k / 3) for k in range(10)]  # 10 .. 10^4


def test_fit_exact_power_law():
    fit = fit_leading_term([(t, t * t) for t in GRID])
    assert fit.alpha == pytest.approx(2.0, abs=0.01) and fit.a == pytest.approx(1.0, abs=0.01)
    assert fit.limit_estimate == math.inf


def test_fit_linear_objective_samples():
    p = make_problem(("x", "y"), "x + y")
    cfg = OracleConfig(starts=8)
    fit = fit_leading_term([(t, sample_psi(p, t, cfg).psi) for t in GRID[::3]])
    assert fit.alpha == pytest.approx(1.0, abs=1e-6) and fit.a == pytest.approx(-1.414, abs=1e-3)
    assert fit.limit_estimate == -math.inf


def test_fit_decaying_example3_samples():
    p = load_problem(fixture_path("example3"))
    cfg = OracleConfig(starts=16)
    fit = fit_leading_term([(t, sample_psi(p, t, cfg).psi) for t in (10.0, 100.0, 1000.0)])
    assert fit.alpha < 0 and fit.limit_estimate == 0.0


def test_fit_flags_a_sign_change():
    samples = [(t, -1.0 if t < 100 else t) for t in GRID]
    fit = fit_leading_term(samples)
    assert fit.flagged and fit.alpha == pytest.approx(1.0, abs=1e-9)


def test_fit_needs_finite_samples():
    with pytest.raises(ValueError):
        fit_leading_term([(10.0, math.nan), (100.0, 1.0)])


# -- certification -------------------------------------------------------------------

def test_radii_validation():
    assert validate_radii(RADII) == RADII
    for bad in ([1e2, 1e3], [1e2, 1e3, 5e3], [1e3, 1e2, 1e5], [0.0, 1e2, 1e3]):
        with pytest.raises(ValueError):
            validate_radii(bad)


def test_both_rays_of_the_linear_objective_certify():
    p = make_problem(("x", "y"), "x + y")
    out = certify_branches(branches_of("v^2 - 2*u"), p, ActiveSet((), 0), RADII, OracleConfig(starts=16))
    assert all(b.certified_real and b.certified_feasible for b in out)
    assert sorted(b.limit.describe() for b in out) == ["+inf", "-inf"]


def test_complex_pair_is_excluded():
    p = make_problem(("x", "y"), "x + y")
    out = certify_branches(branches_of("v^2 + u"), p, ActiveSet((), 0), RADII, OracleConfig(starts=8))
    assert out and not any(b.certified_real or b.counts for b in out)


def test_example1_branch_set(reports):
    got = sorted((b["alpha"], b["series"]) for b in counted(reports("example1")))
    assert got == [("1", "1*t^1"), ("2", "1*t^2"), ("2", "1*t^2 + 0.25*t^0")]
    assert all(b["lambda"] == {"infinite": "+inf"} for b in counted(reports("example1")))


def test_example2_branch_set(reports):
    got = sorted(b["lambda"]["infinite"] for b in counted(reports("example2")))
    assert got == ["+inf", "-inf"]


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_certified_flags_are_nested(name, reports):
    for b in reports(name).data["branches"]:
        if b["certified_feasible"]:
            assert b["certified_real"] and b["is_real"]
        if not b["is_real"]:
            assert not b["counted"]


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_monotone_tails(name, reports):
    for b in counted(reports(name)):
        vals = [w["value"] for w in sorted(b["witnesses"], key=lambda w: w["t"])]
        steps = [b2 - a for a, b2 in zip(vals, vals[1:])]
        tol = [1e-6 * max(1.0, abs(a), abs(b2)) for a, b2 in zip(vals, vals[1:])]
        rising = all(s >= -e for s, e in zip(steps, tol))
        falling = all(s <= e for s, e in zip(steps, tol))
        assert rising or falling, (b["series"], vals)
        assert b["monotone_tail"]


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_psi_matches_the_lowest_branch(name, reports):
    rows = reports(name).data["meta"]["consistency"]["psi_vs_branches"]
    assert rows
    for row in rows:
        assert abs(row["branch_min"] - row["psi"]) <= 1e-3 * max(1.0, abs(row["psi"]))
