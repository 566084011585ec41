import math
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from tangent_inf.poly import MultiPoly, PolyParseError, gradient, parse_poly

NAMES = ("x", "y", "z")


@st.composite
def polys(draw, nvars=3, max_terms=5, max_deg=3):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        mono = tuple(draw(st.integers(0, max_deg)) for _ in range(nvars))
        num = draw(st.integers(-9, 9))
        den = draw(st.integers(1, 5))
        terms[mono] = terms.get(mono, 0) + Fraction(num, den)
    return MultiPoly(nvars, terms)


rationals = st.fractions(min_value=-3, max_value=3, max_denominator=7)


def no_zero_coeffs(p: MultiPoly) -> bool:
    return all(c != 0 for c in p.terms.values())


@given(polys(), polys(), polys())
def test_addition_is_associative(p, q, r):
    assert ((p + q) + r).terms == (p + (q + r)).terms


@given(polys(), polys(), polys())
def test_multiplication_distributes(p, q, r):
    assert (p * (q + r)).terms == (p * q + p * r).terms


@given(polys(), polys())
def test_multiplication_commutes(p, q):
    assert (p * q).terms == (q * p).terms


@given(polys(), polys())
def test_no_stored_zero_coefficients(p, q):
    for r in (p + q, p - q, p * q, p - p, p.diff(0), p.subs(1, q)):
        assert no_zero_coeffs(r)


@given(polys())
def test_parse_inverts_pretty_print(p):
    assert parse_poly(p.to_str(NAMES), NAMES).terms == p.terms


@settings(max_examples=60)
@given(polys(), st.lists(rationals, min_size=3, max_size=3))
def test_gradient_matches_central_difference(p, point):
    h = 1e-5
    x = [float(v) for v in point]
    for i, g in enumerate(gradient(p)):
        exact = float(g.eval_exact([mpq(v) for v in point]))
        up, dn = list(x), list(x)
        up[i] += h
        dn[i] -= h
        fd = (p.eval_float(up) - p.eval_float(dn)) / (2 * h)
        scale = max(1.0, abs(exact), sum(abs(float(c)) for c in p.terms.values()))
        assert abs(fd - exact) <= 1e-6 * scale


def test_parse_lifted_example3_objective():
    p = parse_poly("(x*y - 1)^2 + z", NAMES)
    assert p.to_str(NAMES) == "x^2*y^2 - 2*x*y + z + 1"


def test_parse_zero_and_fractions():
    assert parse_poly("0", ("x",)).is_zero()
    p = parse_poly("x^2 + 1/2*y", ("x", "y"))
    assert p.terms == {(2, 0): 1, (0, 1): mpq(1, 2)}


@pytest.mark.parametrize("text", ["x^-1", "2x", "x +", "(x", "x^y", "q + 1", "1/0"])
def test_parse_rejects_bad_input(text):
    with pytest.raises(PolyParseError):
        parse_poly(text, ("x", "y"))


def test_parse_error_reports_position():
    with pytest.raises(PolyParseError) as info:
        parse_poly("x + * y", ("x", "y"))
    assert "column" in str(info.value)


def test_small_identities():
    x, y = (parse_poly(v, ("x", "y")) for v in ("x", "y"))
    assert ((x + y) * (x - y)).terms == parse_poly("x^2 - y^2", ("x", "y")).terms
    assert (x + 0).terms == x.terms
    assert ((x + 1) ** 3).to_str(("x", "y")) == "x^3 + 3*x^2 + 3*x + 1"


def test_gradient_examples():
    names = ("x", "y")
    assert [g.to_str(names) for g in gradient(parse_poly("x^2 + y", names))] == ["2*x", "1"]
    f = parse_poly("x^2*y^2 - 2*x*y + z + 1", NAMES)
    assert [g.to_str(NAMES) for g in gradient(f)] == ["2*x*y^2 - 2*y", "2*x^2*y - 2*x", "1"]
    assert all(g.is_zero() for g in gradient(MultiPoly.constant(3, 5)))


def test_evaluation_examples():
    names = ("x", "y")
    assert parse_poly("x^2 + y", names).eval_exact([2, 3]) == 7
    f = parse_poly("x^2*y^2 - 2*x*y + z + 1", NAMES)
    assert f.eval_exact([1, 1, 0]) == 0
    p = parse_poly("3*x*y + 7/2", names)
    assert p.eval_exact([0, 0]) == mpq(7, 2)
    assert parse_poly("x^2 + y^2", names).eval_float([3.0, 4.0]) == 25.0
    t = 10.0
    v = parse_poly("x + y", names).eval_float([-0.7071067811865476 * t] * 2)
    assert math.isclose(v, -14.142135623, rel_tol=1e-9)
    assert MultiPoly.zero(2).eval_float([1.5, -2.0]) == 0.0


def test_exponent_overflow_is_an_error():
    with pytest.raises(OverflowError):
        MultiPoly(1, {(2**70,): 1})
