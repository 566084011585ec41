"""Exact division, pseudo-remainders, subresultants, gcd and squarefree parts.

Everything works on :class:`MultiPoly` values; a polynomial is viewed as a
univariate polynomial in one chosen variable with coefficients in the ring of
the remaining variables whenever a recursive algorithm needs it.
"""

from __future__ import annotations

import heapq

from gmpy2 import mpq

from .poly import MultiPoly


class NotDivisible(ArithmeticError):
    pass


def _neg(m):
    return tuple(-e for e in m)


def exact_divide(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Return ``a / b``, raising :class:`NotDivisible` if ``b`` does not divide ``a``."""
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if a.is_zero():
        return a
    if b.is_constant():
        return a.scale(1 / b.constant_term())
    lead = max(b.terms)
    lead_c = b.terms[lead]
    tail = [(m, c) for m, c in b.terms.items() if m != lead]
    rem = dict(a.terms)
    heap = [_neg(m) for m in rem]
    heapq.heapify(heap)
    quot = {}
    while heap:
        m = _neg(heapq.heappop(heap))
        c = rem.pop(m, None)
        if c is None:
            continue
        qm = tuple(x - y for x, y in zip(m, lead))
        if min(qm) < 0:
            raise NotDivisible("polynomial division is not exact")
        qc = c / lead_c
        quot[qm] = qc
        for bm, bc in tail:
            mm = tuple(x + y for x, y in zip(qm, bm))
            old = rem.get(mm)
            if old is None:
                rem[mm] = -qc * bc
                heapq.heappush(heap, _neg(mm))
            else:
                new = old - qc * bc
                if new:
                    rem[mm] = new
                else:
                    del rem[mm]
    return MultiPoly(a.nvars, quot, _normalized=True)


def divides(b: MultiPoly, a: MultiPoly) -> bool:
    try:
        exact_divide(a, b)
    except NotDivisible:
        return False
    return True


# -- univariate views ------------------------------------------------------

def coeffs_in(p: MultiPoly, i: int) -> dict[int, MultiPoly]:
    """Split ``p`` into ``{k: coefficient of var_i^k}`` with var_i removed."""
    groups: dict[int, dict] = {}
    for m, c in p.terms.items():
        e = m[i]
        if e:
            mm = list(m)
            mm[i] = 0
            m = tuple(mm)
        groups.setdefault(e, {})[m] = c
    return {e: MultiPoly(p.nvars, t, _normalized=True) for e, t in groups.items()}


def from_coeffs(coeffs: dict[int, MultiPoly], i: int, nvars: int) -> MultiPoly:
    out = {}
    for e, q in coeffs.items():
        for m, c in q.terms.items():
            mm = list(m)
            mm[i] += e
            out[tuple(mm)] = c
    return MultiPoly(nvars, out, _normalized=True)


def degree_in(p: MultiPoly, i: int) -> int:
    return max((m[i] for m in p.terms), default=-1)


def leading_coeff_in(p: MultiPoly, i: int) -> MultiPoly:
    d = degree_in(p, i)
    return MultiPoly(
        p.nvars,
        {m[:i] + (0,) + m[i + 1:]: c for m, c in p.terms.items() if m[i] == d},
        _normalized=True,
    )


def _shift(p: MultiPoly, i: int, k: int) -> MultiPoly:
    if k == 0:
        return p
    mono = [0] * p.nvars
    mono[i] = k
    return p.mul_term(tuple(mono), mpq(1))


def pseudo_remainder(a: MultiPoly, b: MultiPoly, i: int) -> MultiPoly:
    """prem(a, b) in variable i: lc(b)^(deg a - deg b + 1) * a mod b."""
    db = degree_in(b, i)
    if db < 0:
        raise ZeroDivisionError("pseudo-remainder by zero")
    da = degree_in(a, i)
    if da < db:
        return a
    lcb = leading_coeff_in(b, i)
    r = a
    e = da - db + 1
    while not r.is_zero() and degree_in(r, i) >= db:
        dr = degree_in(r, i)
        lcr = leading_coeff_in(r, i)
        r = r * lcb - _shift(lcr * b, i, dr - db)
        e -= 1
    if e:
        r = r * lcb**e
    return r


def subresultant_prs(a: MultiPoly, b: MultiPoly, i: int):
    """Subresultant remainder sequence; yields (sequence, resultant)."""
    if a.is_zero() or b.is_zero():
        return [a, b], MultiPoly.zero(a.nvars)
    one = MultiPoly.constant(a.nvars, 1)
    sign = 1
    if degree_in(a, i) < degree_in(b, i):
        a, b = b, a
        if degree_in(a, i) % 2 and degree_in(b, i) % 2:
            sign = -1
    seq = [a, b]
    g = h = one
    while True:
        da, db = degree_in(a, i), degree_in(b, i)
        delta = da - db
        if da % 2 and db % 2:
            sign = -sign
        r = pseudo_remainder(a, b, i)
        a = b
        if r.is_zero():
            return seq, MultiPoly.zero(a.nvars)
        b = exact_divide(r, g * h**delta)
        seq.append(b)
        g = leading_coeff_in(a, i)
        if delta == 1:
            h = g
        elif delta > 1:
            h = exact_divide(g**delta, h ** (delta - 1))
        if degree_in(b, i) == 0:
            da = degree_in(a, i)
            lcb = leading_coeff_in(b, i)
            if da == 1:
                res = lcb
            else:
                res = exact_divide(lcb**da, h ** (da - 1))
            return seq, res.scale(sign)


def resultant(a: MultiPoly, b: MultiPoly, i: int) -> MultiPoly:
    """Resultant of ``a`` and ``b`` with respect to variable ``i``.

    Computed by the subresultant algorithm with exact division over the ring
    of the remaining variables; equals the Sylvester determinant.
    """
    if a.is_zero() or b.is_zero():
        return MultiPoly.zero(a.nvars)
    da, db = degree_in(a, i), degree_in(b, i)
    if da == 0:
        return a**db if db > 0 else MultiPoly.constant(a.nvars, 1)
    if db == 0:
        return b**da
    return subresultant_prs(a, b, i)[1]


# -- gcd -----------------------------------------------------------------------

def normalize(p: MultiPoly) -> MultiPoly:
    """Integer content-free form with positive leading coefficient."""
    return p.primitive()


def content_in(p: MultiPoly, i: int) -> MultiPoly:
    g = MultiPoly.zero(p.nvars)
    for q in sorted(coeffs_in(p, i).values(), key=len):
        g = gcd(g, q)
        if g.is_constant():
            return MultiPoly.constant(p.nvars, 1)
    return g


def gcd(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Greatest common divisor over Q, normalized to primitive integer form."""
    if a.is_zero():
        return normalize(b)
    if b.is_zero():
        return normalize(a)
    if a.is_constant() or b.is_constant():
        return MultiPoly.constant(a.nvars, 1)
    va, vb = a.variables_used(), b.variables_used()
    common = va & vb
    if not common:
        return MultiPoly.constant(a.nvars, 1)
    # a variable used by only one side means the gcd lies in the content
    only = sorted((va | vb) - common)
    if only:
        i = only[-1]
        if i in va:
            return gcd(content_in(a, i), b)
        return gcd(a, content_in(b, i))
    i = max(common)
    ca, cb = content_in(a, i), content_in(b, i)
    c = gcd(ca, cb)
    pa, pb = exact_divide(a, ca), exact_divide(b, cb)
    if degree_in(pa, i) < degree_in(pb, i):
        pa, pb = pb, pa
    seq, _ = subresultant_prs(pa, pb, i)
    last = seq[-1]
    if last.is_zero():
        last = seq[-2]
    if degree_in(last, i) <= 0:
        return normalize(c)
    g = exact_divide(last, content_in(last, i))
    return normalize(c * g)


def squarefree_part(p: MultiPoly) -> MultiPoly:
    """Product of the distinct irreducible factors of ``p`` (up to a constant)."""
    if p.is_zero() or p.is_constant():
        return normalize(p) if not p.is_zero() else p
    g = p
    for i in sorted(p.variables_used()):
        g = gcd(g, p.diff(i))
        if g.is_constant():
            return normalize(p)
    return normalize(exact_divide(p, g))


def is_squarefree(p: MultiPoly) -> bool:
    return squarefree_part(p) == normalize(p)
