import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from tangent_inf import polyalg
from tangent_inf.asymptotics import branch_limit
from tangent_inf.poly import MultiPoly, parse_poly
from tangent_inf.puiseux import NotSquarefree, puiseux_branches, residual


def curve(text):
    return parse_poly(text, ("u", "v"))


def real_sorted(branches):
    return sorted((b for b in branches if b.is_real), key=lambda b: float(b.leading.to_mpf(30)))


def test_two_rays_of_a_linear_objective():
    lo, hi = real_sorted(puiseux_branches(curve("v^2 - 2*u")))
    for b, sign in ((lo, -1), (hi, 1)):
        assert b.alpha == 1 and b.terminated
        assert [int(c) for c in b.leading.minpoly] == [-2, 0, 1]
        assert float(b.leading.to_mpf(30)) == pytest.approx(sign * math.sqrt(2), abs=1e-12)
    assert branch_limit(lo).kind < 0 and branch_limit(hi).kind > 0


def test_graph_of_radius_squared():
    (b,) = puiseux_branches(curve("v - u"))
    assert b.alpha == 2 and b.leading.describe() == "1" and b.terminated


def test_decaying_branch():
    # t*y = 1 reads u*v^2 = 1 after squaring; the positive sheet is y = 1/t
    branches = real_sorted(puiseux_branches(curve("u*v^2 - 1")))
    assert [b.alpha for b in branches] == [-1, -1]
    assert branches[1].leading.describe() == "1"
    assert all(branch_limit(b).describe() == "0" for b in branches)


def test_constant_term_behind_a_decaying_tail():
    (b, _) = sorted(puiseux_branches(curve("v^2 - u*v - 1")), key=lambda b: b.alpha)
    assert b.alpha == -2 and branch_limit(b).describe() == "0"


def test_repeated_factor_is_rejected():
    with pytest.raises(NotSquarefree):
        puiseux_branches(curve("(v - u)^2"))


def test_complex_pair_is_flagged():
    branches = puiseux_branches(curve("v^2 + u"))
    assert len(branches) == 2 and not any(b.is_real for b in branches)
    zs = sorted((b.complex_leading for b in branches), key=lambda z: z.imag)
    assert zs[0] == pytest.approx(zs[1].conjugate())
    with pytest.raises(ValueError):
        branch_limit(branches[0])


RESIDUAL_CURVES = ["v^2 - u*v - 1", "v^3 - u*v + 1 + u", "u*v^2 - 1 - v", "v^3 - 2*u*v^2 + u^2 - v"]


@pytest.mark.parametrize("text", RESIDUAL_CURVES)
def test_residual_order(text):
    checked = 0
    for b in puiseux_branches(curve(text), depth=6):
        if not b.is_real or b.terminated:
            continue
        g = b.exponents
        for k in range(1, len(g) - 1):
            r = {t: (residual(b, t, k), residual(b, t, k + 1)) for t in (1e2, 1e3)}
            # more terms never hurt at the larger radius
            assert r[1e3][1] < r[1e3][0]
            observed = (r[1e3][0] / r[1e3][1]) / (r[1e2][0] / r[1e2][1])
            predicted = mpmath.mpf(10) ** (2 * (g[k] - g[k - 1]))
            assert predicted / 10 <= observed <= predicted * 10
            checked += 1
    assert checked


@st.composite
def bivariate(draw):
    terms = {}
    for _ in range(draw(st.integers(2, 5))):
        terms[(draw(st.integers(0, 3)), draw(st.integers(0, 3)))] = draw(st.integers(-4, 4))
    return MultiPoly(2, terms)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
@given(bivariate())
def test_conjugate_closure(P):
    assume(not P.is_zero() and P.involves(1) and polyalg.is_squarefree(P))
    branches = puiseux_branches(P, depth=2)
    complex_ones = [b for b in branches if not b.is_real]
    pool = [b.complex_leading for b in complex_ones]
    for b in complex_ones:
        z = b.complex_leading
        partner = min(pool, key=lambda w: abs(w - z.conjugate()))
        assert abs(partner - z.conjugate()) <= 1e-8 * (1 + abs(z))
        assert any(c.alpha == b.alpha for c in complex_ones if c.complex_leading == partner)
    # real leading coefficients carry irreducible minimal polynomials with a real root inside the interval
    for b in branches:
        if b.is_real and b.leading is not None:
            mp = [Fraction(int(c.numerator), int(c.denominator)) for c in b.leading.minpoly]
            with mpmath.workdps(40):
                x = b.leading.to_mpf(40)
                assert abs(sum(c * x**i for i, c in enumerate(mp))) < mpmath.mpf(10) ** -25 * (1 + abs(x)) ** len(mp)
