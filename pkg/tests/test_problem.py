from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURE_NAMES, fixture_path
from tangent_inf.oracle import OracleConfig
from tangent_inf.problem import (
    ProblemError,
    canonical_lift,
    check_unbounded_domain,
    lift_abs,
    load_problem,
    make_problem,
    parse_problem_text,
    save_problem,
)

FAST = OracleConfig(starts=16)


def test_plain_linear_problem():
    p = parse_problem_text("vars: x y\nobjective: x + y\n")
    assert p.vars == ("x", "y")
    assert p.equalities == () and p.inequalities == ()
    assert p.regular


def test_orthant_problem():
    p = parse_problem_text("vars: x y\nobjective: x + y\nineq: x\nineq: y\n")
    assert [p.fmt(h) for h in p.inequalities] == ["x", "y"]


@pytest.mark.parametrize(
    "text",
    [
        "vars: x\nobjective: x^-1\n",
        "vars: x\nobjective: x\ncolor: red\n",
        "objective: x\n",
        "vars: x\n",
        "vars: x x\nobjective: x\n",
        "vars: x\nobjective: x\nregular: maybe\n",
        "vars: x\nobjective: y\n",
    ],
)
def test_malformed_files_are_rejected(text):
    with pytest.raises(ProblemError):
        parse_problem_text(text)


def test_comments_and_regular_flag():
    p = parse_problem_text("# header\nvars: x  # one var\nobjective: x^2\nregular: false\n")
    assert not p.regular


def test_example1_lifting():
    base = make_problem(("x", "y"), "0")
    lifted, rec = lift_abs(base, "y", "z")
    assert lifted.vars == ("x", "y", "z")
    assert lifted.fmt(rec.equality) == "-y^2 + z^2"
    assert lifted.fmt(rec.inequality) == "z"
    p = parse_problem_text("vars: x y\nabs: z = y\nobjective: x^2 + z\n")
    assert p.fmt(p.objective) == "x^2 + z"
    assert [p.fmt(g) for g in p.equalities] == ["-y^2 + z^2"]
    assert [p.fmt(h) for h in p.inequalities] == ["z"]
    assert p.sphere_vars == (0, 1)


def test_example3_lifting():
    p = load_problem(fixture_path("example3"))
    assert p.fmt(p.objective) == "x^2*y^2 - 2*x*y + z + 1"
    assert [p.fmt(g) for g in p.equalities] == ["-y^2 + z^2"]


def test_degenerate_lift_of_a_constant():
    lifted, rec = lift_abs(make_problem(("x",), "x^2"), "0", "z")
    assert lifted.fmt(rec.equality) == "z^2"
    assert canonical_lift(lifted, [3]) == [3, 0]


def test_lift_name_clash():
    with pytest.raises(ProblemError):
        lift_abs(make_problem(("x", "y"), "x"), "y", "x")


small = st.fractions(min_value=-5, max_value=5, max_denominator=9)


@given(small, small)
def test_lifting_is_sound_for_example1(x, y):
    p = load_problem(fixture_path("example1"))
    point = canonical_lift(p, [x, y])
    assert Fraction(p.objective.eval_exact(point)) == x * x + abs(y)


@given(small, small)
def test_lifting_is_sound_for_example3(x, y):
    p = load_problem(fixture_path("example3"))
    point = canonical_lift(p, [x, y])
    assert Fraction(p.objective.eval_exact(point)) == (x * y - 1) ** 2 + abs(y)


@settings(max_examples=20, deadline=None)
@given(small, small, small)
def test_nested_lifting_is_sound(x, y, w):
    p = parse_problem_text("vars: x y w\nabs: a = x - y\nabs: b = a - w\nobjective: a + b^2\n")
    point = canonical_lift(p, [x, y, w])
    assert Fraction(p.objective.eval_exact(point)) == abs(x - y) + abs(abs(x - y) - w) ** 2
    assert all(g.eval_exact(point) == 0 for g in p.equalities)
    assert all(h.eval_exact(point) >= 0 for h in p.inequalities)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_save_then_load_is_identity(name, tmp_path):
    p = load_problem(fixture_path(name))
    out = tmp_path / "copy.problem"
    save_problem(p, out)
    assert load_problem(out) == p


def test_save_then_load_with_constraints(tmp_path):
    p = make_problem(("x", "y"), "x*y - 1/3", equalities=["x^2 - y"], inequalities=["1 - x", "y"], regular=False)
    out = tmp_path / "p.problem"
    save_problem(p, out)
    assert load_problem(out) == p


def test_unbounded_domain_on_the_plane():
    ok, witnesses = check_unbounded_domain(make_problem(("x", "y"), "x"), [10, 100, 1000], FAST)
    assert ok and len(witnesses) == 3


def test_bounded_ball_fails_at_first_radius():
    ball = make_problem(("x", "y"), "x", inequalities=["1 - x^2 - y^2"])
    assert check_unbounded_domain(ball, [10, 100, 1000], FAST) == (False, 10)


def test_orthant_is_unbounded_with_nonnegative_witnesses():
    p = load_problem(fixture_path("orthant"))
    ok, witnesses = check_unbounded_domain(p, [10, 100], FAST)
    assert ok
    for t, w in zip([10, 100], witnesses):
        assert min(w) >= -1e-9
        assert abs(sum(v * v for v in w) ** 0.5 - t) <= 1e-6 * t


def test_radii_must_increase():
    with pytest.raises(ValueError):
        check_unbounded_domain(make_problem(("x",), "x"), [100, 10])
