"""Newton-Puiseux expansion of plane-curve branches as the radius grows.

Curves arrive as ``P(u, v)`` with ``u = t^2``.  With ``s = 1/u`` every branch
is a series ``v = c0 s^g0 + c1 s^g1 + ...`` with rational ``g0 < g1 < ...``;
``g0`` may be negative (the branch grows).  In the radius variable the
leading term reads ``c0 t^alpha`` with ``alpha = -2 g0``.

The first coefficient is an exact real algebraic number.  Deeper
coefficients live in the number field generated by the first irrational
coefficient met along the way; when a deeper characteristic polynomial has
no root that can be expressed there, the expansion stops and the branch is
marked depth limited.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import mpmath
import numpy as np
from gmpy2 import mpq

from . import polyalg
from . import univariate as up
from .algebraic import FieldElem, NumberField, RealAlgebraic, irreducible_factors
from .poly import MultiPoly

DEFAULT_DEPTH = 4
MAX_DEPTH = 8


class NotSquarefree(ValueError):
    pass


@dataclass
class RawBranch:
    """One formal branch of a curve factor at infinity."""

    factor: MultiPoly
    exponents: list[Fraction]
    coeffs: list[FieldElem]
    field: NumberField
    leading: RealAlgebraic | None
    is_real: bool = True
    complex_leading: complex | None = None
    terminated: bool = False
    depth_limited: bool = False
    multiplicity: int = 1
    notes: list[str] = field(default_factory=list)

    @property
    def gamma(self) -> Fraction:
        return self.exponents[0]

    @property
    def alpha(self) -> Fraction:
        """Leading exponent in the radius variable t."""
        return -2 * self.exponents[0]

    @property
    def is_constant(self) -> bool:
        return self.is_real and self.terminated and len(self.exponents) == 1 and self.exponents[0] == 0

    def t_exponents(self) -> list[Fraction]:
        return [-2 * g for g in self.exponents]

    def value(self, t, dps: int = 50, terms: int | None = None):
        """Truncated series evaluated at radius ``t`` (mpmath)."""
        with mpmath.workdps(dps):
            s = 1 / mpmath.mpf(t) ** 2
            total = mpmath.mpf(0)
            k = len(self.coeffs) if terms is None else min(terms, len(self.coeffs))
            for g, c in zip(self.exponents[:k], self.coeffs[:k]):
                total += c.to_mpf(dps) * mpmath.power(s, mpmath.mpf(g.numerator) / g.denominator)
            return total

    def describe(self) -> str:
        parts = []
        for g, c in zip(self.t_exponents(), self.coeffs):
            parts.append(f"{float(c.to_mpf(20)):.6g}*t^{g}")
        tail = "" if self.terminated else " + ..."
        return " + ".join(parts) + tail


# -- Newton polygon -----------------------------------------------------------------

def lower_hull(points: list[tuple]) -> list[tuple]:
    """Lower convex hull of points (b, j) sorted by b (monotone chain)."""
    pts = sorted(points)
    hull: list[tuple] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] if it lies on or above the segment hull[-2] -> p
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _edges(poly: dict):
    """Edges of the lower Newton polygon as (gamma, [(b, j) on edge], m)."""
    lowest: dict = {}
    for (j, b) in poly:
        if b not in lowest or j < lowest[b]:
            lowest[b] = j
    pts = [(b, j) for b, j in lowest.items()]
    hull = lower_hull(pts)
    out = []
    for (b1, j1), (b2, j2) in zip(hull, hull[1:]):
        gamma = Fraction(j1 - j2) / (b2 - b1)
        m = j1 + b1 * gamma
        on_edge = [(b, j) for b, j in pts if j + b * gamma == m]
        out.append((gamma, sorted(on_edge), m))
    return out


def _char_poly(poly: dict, edge_pts, field: NumberField) -> list[FieldElem]:
    b0 = edge_pts[0][0]
    deg = edge_pts[-1][0] - b0
    coeffs = [field.elem(0)] * (deg + 1)
    for b, j in edge_pts:
        coeffs[b - b0] = poly[(j, b)]
    return coeffs


def _substitute(poly: dict, gamma: Fraction, c: FieldElem, m: Fraction, field: NumberField) -> dict:
    """s^-m * Q(s, s^gamma (c + w)) as a dict {(s-exponent, w-degree): coeff}."""
    out: dict = {}
    powers = [field.elem(1)]
    maxb = max(b for _, b in poly)
    for _ in range(maxb):
        powers.append(powers[-1] * c)
    for (j, b), a in poly.items():
        e = j + b * gamma - m
        for k in range(b + 1):
            term = a * powers[b - k] * comb(b, k)
            if term.is_zero():
                continue
            key = (e, k)
            prev = out.get(key)
            out[key] = term if prev is None else prev + term
    return {k: v for k, v in out.items() if not v.is_zero()}


def _roots_in_field(coeffs: list[FieldElem], field: NumberField):
    """Roots of a characteristic polynomial that are expressible in ``field``.

    Returns (roots as [(FieldElem, multiplicity, new_field)], complex_count,
    unresolved) where ``unresolved`` is True if some roots could not be
    represented.
    """
    deg = len(coeffs) - 1
    if all(c.is_rational() for c in coeffs):
        rat = [c.rational_value() for c in coeffs]
        if field.degree == 1:
            return _rational_field_roots(rat)
        # rational polynomial seen from a larger field: only rational roots are usable
        roots = []
        for f in irreducible_factors(rat):
            mult = _multiplicity(rat, f)
            if len(f) == 2:
                roots.append((field.elem(-f[0]), mult, field))
        found = sum(m for _, m, _ in roots)
        return roots, 0, found < deg
    if deg == 1:
        return [(-coeffs[0] / coeffs[1], 1, field)], 0, False
    # a perfect power a (c - r)^deg
    r = -coeffs[deg - 1] / (coeffs[deg] * deg)
    ok = all(coeffs[k] == coeffs[deg] * comb(deg, k) * (-r) ** (deg - k) for k in range(deg + 1))
    if ok:
        return [(r, deg, field)], 0, False
    return [], 0, True


def _multiplicity(p: list, f: list) -> int:
    k = 0
    while True:
        q, r = up.divmod_poly(p, f)
        if r:
            return k
        p, k = q, k + 1


def _rational_field_roots(rat: list):
    deg = len(rat) - 1
    roots = []
    real_count = 0
    for f in irreducible_factors(rat):
        mult = _multiplicity(rat, f)
        for lo, hi in up.isolate_real_roots(f, width=mpq(1, 2**20)):
            a = RealAlgebraic(f, lo, hi)
            if a.is_rational:
                fld = NumberField()
                roots.append((fld.elem(a.lo), mult, fld))
            else:
                fld = NumberField(a)
                roots.append((fld.gen(), mult, fld))
            real_count += mult
    return roots, deg - real_count, False


def _complex_roots(rat: list) -> list[complex]:
    ints = up.primitive_int(rat)
    r = np.roots([float(c) for c in reversed(ints)])
    return [complex(z) for z in r if abs(z.imag) > 1e-9 * max(1.0, abs(z))]


def _expand(poly, field, exps, coeffs, depth, factor, mult, first, out):
    if len(exps) >= depth:
        out.append(_finish(factor, exps, coeffs, field, terminated=False, mult=mult))
        return
    has_w0 = any(b == 0 for (_, b) in poly)
    if not first and not has_w0:
        out.append(_finish(factor, exps, coeffs, field, terminated=True, mult=mult))
        if mult == 1:
            return
    for gamma, edge_pts, m in _edges(poly):
        if not first and gamma <= 0:
            continue
        phi = _char_poly(poly, edge_pts, field)
        roots, n_complex, unresolved = _roots_in_field(phi, field)
        if first and n_complex:
            rat = [c.rational_value() for c in phi]
            for z in _complex_roots(rat):
                out.append(
                    RawBranch(factor, [gamma], [field.elem(0)], field, None, is_real=False, complex_leading=z)
                )
        if not first and (n_complex or unresolved):
            if not roots:
                br = _finish(factor, exps, coeffs, field, terminated=False, mult=mult)
                if n_complex and not unresolved:
                    br.is_real = False
                    br.notes.append("deeper coefficients are non-real")
                else:
                    br.depth_limited = True
                    br.notes.append("deeper characteristic polynomial has no root in the coefficient field")
                out.append(br)
                continue
        for c, r, fld in roots:
            if fld is not field:
                # a new field only ever extends Q, so every coefficient is rational
                base = {k: fld.elem(v.rational_value()) for k, v in poly.items()}
            else:
                base = poly
            nxt = _substitute(base, gamma, c, m, fld)
            # exponents accumulate: each step shifts by the new edge's gamma
            new_exp = gamma if first else exps[-1] + gamma
            _expand(nxt, fld, exps + [new_exp], coeffs + [c], depth, factor, r, False, out)


def _finish(factor, exps, coeffs, field, terminated, mult) -> RawBranch:
    c0 = coeffs[0]
    if c0.is_rational():
        lead = RealAlgebraic.rational(c0.rational_value())
    elif c0 == field.gen():
        lead = field.generator
    else:
        lead = c0.to_real_algebraic()
    return RawBranch(factor, list(exps), list(coeffs), field, lead, terminated=terminated, multiplicity=mult)


def factor_branches(factor: MultiPoly, depth: int = DEFAULT_DEPTH) -> list[RawBranch]:
    """Branches at u -> infinity of one irreducible factor ``P(u, v)``."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if factor.nvars != 2 or not factor.involves(1):
        return []
    d = polyalg.degree_in(factor, 0)
    q = NumberField()
    # the term u^i v^b sits at (s-exponent d - i, v-degree b)
    poly = {(Fraction(d - m[0]), m[1]): q.elem(c) for m, c in factor.terms.items()}
    out: list[RawBranch] = []
    if not any(b == 0 for (_, b) in poly):
        # v divides the factor; irreducibility means the factor is v itself
        out.append(RawBranch(factor, [Fraction(0)], [q.elem(0)], q, RealAlgebraic.rational(0), terminated=True))
        return out
    _expand(poly, q, [], [], depth, factor, 1, True, out)
    return out


def newton_polygon_branches(factors, depth: int = DEFAULT_DEPTH) -> list[RawBranch]:
    """Branches of every irreducible factor of a curve (see :class:`PlaneCurve`)."""
    out = []
    for f in factors:
        out.extend(factor_branches(f, depth))
    return out


def puiseux_branches(P: MultiPoly, depth: int = DEFAULT_DEPTH) -> list[RawBranch]:
    """Branches of an arbitrary squarefree ``P(u, v)``; raises on repeated factors."""
    if P.is_zero():
        raise ValueError("zero polynomial has no branches")
    if not polyalg.is_squarefree(P):
        raise NotSquarefree("curve polynomial must be squarefree")
    from .elimination import irreducible_factors as mfactors

    return newton_polygon_branches(mfactors(P), depth)


def residual(branch: RawBranch, t, terms: int, dps: int = 80):
    """|P(t^2, truncated branch)| using the first ``terms`` coefficients."""
    with mpmath.workdps(dps):
        v = branch.value(t, dps, terms)
        u = mpmath.mpf(t) ** 2
        total = mpmath.mpf(0)
        for m, c in branch.factor.terms.items():
            total += mpmath.mpf(c.numerator) / c.denominator * u ** m[0] * v ** m[1]
        return abs(total)
