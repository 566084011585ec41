import numpy as np
import pytest

from conftest import FIXTURE_NAMES, fixture_path
from tangent_inf.oracle import OracleConfig, critical_witness, numeric_system, solve_system_numeric
from tangent_inf.problem import load_problem, make_problem
from tangent_inf.systems import (
    ActiveSetCapExceeded,
    build_critical_system,
    build_tangency_system,
    drop_mu,
    enumerate_active_sets,
)

CFG = OracleConfig(starts=16)


def sets_of(problem):
    return {J.label(): J for J in enumerate_active_sets(problem)}


def test_unconstrained_gradient_system():
    p = make_problem(("x", "y"), "x^2 + y^2")
    assert build_critical_system(p, sets_of(p)["{}"]).describe() == ["2*x", "2*y"]


def test_orthant_with_both_constraints_active():
    p = make_problem(("x", "y"), "x + y", inequalities=["x", "y"])
    s = build_critical_system(p, sets_of(p)["{1,2}"])
    assert s.describe() == ["-nu1 + 1", "-nu2 + 1", "x", "y"]
    assert [(c.to_str(s.names), k) for c, k in s.sign_conditions] == [("nu1", ">=0"), ("nu2", ">=0")]


def test_linear_tangency_system():
    p = make_problem(("x", "y"), "x + y")
    s = build_tangency_system(p, sets_of(p)["{}"])
    assert s.names == ("x", "y", "mu", "t", "v")
    assert s.describe() == ["x*mu + 1", "y*mu + 1", "x^2 + y^2 - t^2", "-x - y + v"]


def test_example1_tangency_contains_the_half_line_branch():
    # on z > 0 the rows force 2 z lambda = -1 and y (mu - 2 lambda) = 0
    p = load_problem(fixture_path("example1"))
    s = build_tangency_system(p, sets_of(p)["{}"])
    assert "2*z*lambda1 + 1" in s.describe()
    assert [(c.to_str(s.names), k) for c, k in s.sign_conditions] == [("z", ">0")]


def test_constant_objective_tangency_rows():
    p = make_problem(("x", "y"), "5")
    s = build_tangency_system(p, sets_of(p)["{}"])
    assert s.describe()[:2] == ["x*mu", "y*mu"]


@pytest.mark.parametrize("m, labels", [(0, ["{}"]), (2, ["{}", "{1}", "{2}", "{1,2}"])])
def test_active_set_power_set(m, labels):
    p = make_problem(("x",), "x", inequalities=[f"x + {k}" for k in range(m)])
    assert [J.label() for J in enumerate_active_sets(p)] == labels


def test_active_set_cap():
    p = make_problem(("x",), "x", inequalities=[f"x + {k}" for k in range(11)])
    with pytest.raises(ActiveSetCapExceeded, match="cap exceeded"):
        enumerate_active_sets(p)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_dropping_mu_gives_the_critical_rows(name):
    p = load_problem(fixture_path(name))
    for J in enumerate_active_sets(p):
        tang = build_tangency_system(p, J)
        crit = build_critical_system(p, J)
        # same variable block for x and the multipliers; compare in the tangency ring
        shared = [crit.names.index(n) for n in crit.names]
        embedded = [e.remap(tang.nvars, [tang.names.index(crit.names[i]) for i in shared]) for e in crit.equations]
        assert set(drop_mu(tang)) == set(embedded)


def _critical_points(problem):
    """Feasible polished critical points over all active sets, via the known critical values."""
    from tangent_inf.elimination import eliminate_to_critical_values

    out = []
    for J in enumerate_active_sets(problem):
        cvp = eliminate_to_critical_values(build_critical_system(problem, J, with_value=True))
        ns = numeric_system(problem, J, tangency=False)
        for r in cvp.roots:
            row = critical_witness(ns, float(r.to_mpf(30)), CFG, f"test:{J.label()}")
            if row is not None:
                out.append((J, ns, row))
    return out


@pytest.mark.parametrize("name", ["example1", "example3", "orthant", "hyperbola"])
def test_numeric_critical_points_are_polished(name):
    p = load_problem(fixture_path(name))
    points = _critical_points(p)
    assert points
    for J, ns, row in points:
        F, S = ns.square.residual(row[None])
        assert np.max(np.abs(F) / S) <= 1e-8


@pytest.mark.parametrize("name", ["example1", "example3", "orthant"])
def test_critical_points_lie_on_the_tangency_variety(name):
    p = load_problem(fixture_path(name))
    for J, ns, row in _critical_points(p):
        tang = numeric_system(p, J, tangency=True)
        x = np.zeros(tang.ncols)
        for k, n in enumerate(ns.sys.names):
            x[tang.sys.names.index(n)] = row[k]
        x[tang.sys.mu_idx] = 0.0
        x[tang.sys.t_idx] = np.linalg.norm(row[list(p.sphere_vars)])
        F, S = tang.square.residual(x[None])
        assert np.max(np.abs(F) / S) <= 1e-8


def test_linear_tangency_solutions_at_radius_ten():
    p = make_problem(("x", "y"), "x + y")
    sols = solve_system_numeric(build_tangency_system(p, sets_of(p)["{}"]), 10.0, CFG)
    pts = sorted(tuple(np.round(s["point"], 6)) for s in sols)
    assert pts == [(-7.071068, -7.071068), (7.071068, 7.071068)]


def test_radial_objective_tangency_has_mu_minus_two():
    p = make_problem(("x", "y"), "x^2 + y^2")
    sols = solve_system_numeric(build_tangency_system(p, sets_of(p)["{}"]), 10.0, CFG)
    assert sols
    for s in sols:
        assert abs(s["multipliers"][-1] + 2) <= 1e-8
        assert abs(np.linalg.norm(s["point"]) - 10) <= 1e-8


def test_inconsistent_system_has_no_solutions():
    p = make_problem(("x", "y"), "x", equalities=["x^2 + 1"])
    assert solve_system_numeric(build_tangency_system(p, sets_of(p)["{}"]), 10.0, CFG) == []
