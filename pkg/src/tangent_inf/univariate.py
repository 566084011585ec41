"""Dense univariate polynomials over Q and real-root isolation.

A polynomial is a list of ``mpq`` coefficients, constant term first, with no
trailing zeros (the zero polynomial is the empty list).
"""

from __future__ import annotations

from typing import Sequence

from gmpy2 import mpq

from .poly import MultiPoly, to_rational

UPoly = list


def trim(p: Sequence) -> UPoly:
    p = [mpq(c) for c in p]
    while p and not p[-1]:
        p.pop()
    return p


def from_multi(p: MultiPoly, i: int | None = None) -> UPoly:
    """Dense coefficients of a polynomial that involves at most variable ``i``."""
    used = p.variables_used()
    if i is None:
        if len(used) > 1:
            raise ValueError("polynomial is not univariate")
        i = next(iter(used), 0)
    elif used - {i}:
        raise ValueError("polynomial involves other variables")
    out = [mpq(0)] * (p.degree_in(i) + 1 if p.terms else 0)
    for m, c in p.terms.items():
        out[m[i]] = c
    return trim(out)


def to_multi(p: Sequence, nvars: int, i: int) -> MultiPoly:
    terms = {}
    for k, c in enumerate(p):
        if c:
            mono = [0] * nvars
            mono[i] = k
            terms[tuple(mono)] = c
    return MultiPoly(nvars, terms)


def degree(p: Sequence) -> int:
    return len(p) - 1


def evaluate(p: Sequence, x) -> mpq:
    acc = mpq(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def evaluate_float(p: Sequence, x: float) -> float:
    acc = 0.0
    for c in reversed(p):
        acc = acc * x + float(c)
    return acc


def derivative(p: Sequence) -> UPoly:
    return trim([c * k for k, c in enumerate(p)][1:])


def add(p: Sequence, q: Sequence) -> UPoly:
    n = max(len(p), len(q))
    return trim([(p[k] if k < len(p) else 0) + (q[k] if k < len(q) else 0) for k in range(n)])


def scale(p: Sequence, c) -> UPoly:
    return trim([a * c for a in p])


def mul(p: Sequence, q: Sequence) -> UPoly:
    if not p or not q:
        return []
    out = [mpq(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return trim(out)


def divmod_poly(p: Sequence, q: Sequence) -> tuple[UPoly, UPoly]:
    q = trim(q)
    if not q:
        raise ZeroDivisionError("division by zero polynomial")
    r = list(trim(p))
    dq = len(q) - 1
    if len(r) - 1 < dq:
        return [], r
    quot = [mpq(0)] * (len(r) - dq)
    lead = q[-1]
    for k in range(len(r) - 1 - dq, -1, -1):
        c = r[k + dq] / lead
        quot[k] = c
        if c:
            for j in range(dq + 1):
                r[k + j] -= c * q[j]
    return trim(quot), trim(r[:dq])


def monic(p: Sequence) -> UPoly:
    p = trim(p)
    if not p:
        return p
    return [c / p[-1] for c in p]


def gcd(p: Sequence, q: Sequence) -> UPoly:
    a, b = trim(p), trim(q)
    while b:
        a, b = b, divmod_poly(a, b)[1]
    return monic(a)


def squarefree(p: Sequence) -> UPoly:
    p = trim(p)
    if len(p) <= 1:
        return monic(p)
    g = gcd(p, derivative(p))
    return monic(divmod_poly(p, g)[0])


def primitive_int(p: Sequence) -> list[int]:
    """Scale to coprime integers with positive leading coefficient."""
    import math

    p = trim(p)
    if not p:
        return []
    den = 1
    for c in p:
        den = den * int(c.denominator) // math.gcd(den, int(c.denominator))
    ints = [int(c * den) for c in p]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if ints[-1] < 0:
        g = -g
    return [v // g for v in ints]


def cauchy_bound(p: Sequence) -> mpq:
    """All complex roots lie in |z| < bound."""
    p = trim(p)
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=mpq(0))


# -- Sturm sequences ---------------------------------------------------------

def sturm_sequence(p: Sequence) -> list[UPoly]:
    p = trim(p)
    seq = [p, derivative(p)]
    while seq[-1]:
        r = divmod_poly(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append(scale(r, -1))
    return [s for s in seq if s]


def _sign_changes(values) -> int:
    changes = 0
    last = 0
    for v in values:
        if v:
            s = 1 if v > 0 else -1
            if last and s != last:
                changes += 1
            last = s
    return changes


def count_roots(seq: list[UPoly], lo, hi) -> int:
    """Number of distinct real roots in the half-open interval (lo, hi]."""
    return _sign_changes(evaluate(s, lo) for s in seq) - _sign_changes(evaluate(s, hi) for s in seq)


def isolate_real_roots(p: Sequence, width=mpq(1, 10**12)) -> list[tuple[mpq, mpq]]:
    """Isolating intervals ``(lo, hi)`` for the distinct real roots, sorted.

    Exact rational roots discovered along the way are reported as ``(r, r)``;
    every other interval has width at most ``width`` and contains one root.
    """
    p = squarefree(p)
    if len(p) <= 1:
        return []
    seq = sturm_sequence(p)
    bound = cauchy_bound(p)
    stack = [(-bound, bound)]
    found = []
    while stack:
        lo, hi = stack.pop()
        k = count_roots(seq, lo, hi)
        if k == 0:
            continue
        if k == 1:
            found.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        stack.append((mid, hi))
        stack.append((lo, mid))
    out = [refine(p, lo, hi, width) for lo, hi in found]
    out.sort()
    return out


def refine(p: Sequence, lo, hi, width=mpq(1, 10**12), max_steps: int | None = None):
    """Bisect a (lo, hi] interval holding one simple root of squarefree ``p``."""
    lo, hi = mpq(lo), mpq(hi)
    if lo == hi:
        return lo, hi
    if not evaluate(p, hi):
        return hi, hi
    s_hi = evaluate(p, hi) > 0
    steps = 0
    while hi - lo > width and (max_steps is None or steps < max_steps):
        mid = (lo + hi) / 2
        v = evaluate(p, mid)
        if not v:
            return mid, mid
        if (v > 0) == s_hi:
            hi = mid
        else:
            lo = mid
        steps += 1
    return lo, hi


def real_roots_float(p: Sequence) -> list[float]:
    return [float((lo + hi) / 2) for lo, hi in isolate_real_roots(p)]


def rational_roots(p: Sequence) -> list[mpq]:
    """Rational roots by the rational-root theorem on the primitive form."""
    from sympy import Poly, symbols

    ints = primitive_int(p)
    if len(ints) <= 1:
        return []
    x = symbols("x")
    roots = Poly(list(reversed(ints)), x).ground_roots()
    return sorted(mpq(int(r.p), int(r.q)) for r in roots if r.is_Rational)


def as_rational(value) -> mpq:
    return to_rational(value)
