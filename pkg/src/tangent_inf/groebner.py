"""Buchberger's algorithm with the sugar strategy and Gebauer-Moeller pair pruning.

Polynomials are handled internally as dicts ``{monomial: mpq}`` normalized to
leading coefficient one.  The work budget counts reduction steps at term
level: cancelling a term with a multiple of a basis element ``g`` costs
``len(g) - 1`` steps.  A second budget caps coefficient height in bits, since
expression swell rather than step count is what makes a basis intractable.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Sequence

from gmpy2 import mpq

from .poly import MultiPoly

DEFAULT_BUDGET = 10**6
DEFAULT_MAX_BITS = 4096


class EliminationBudgetExceeded(RuntimeError):
    """Raised when Buchberger runs past its step budget; retry with resultants."""

    def __init__(self, steps: int, budget: int, reason: str = ""):
        self.steps, self.budget = steps, budget
        reason = reason or f"{steps} reduction steps > {budget}"
        super().__init__(
            f"elimination budget exceeded ({reason}); "
            "fall back to resultant mode or raise --gb-budget"
        )


def _grevlex(m):
    return (sum(m),) + tuple(-e for e in reversed(m))


@dataclass(frozen=True)
class TermOrder:
    """Monomial order: ``lex``, ``grevlex`` or ``block`` (grevlex on each block)."""

    kind: str = "grevlex"
    split: int = 0

    def __post_init__(self):
        if self.kind not in ("lex", "grevlex", "block"):
            raise ValueError(f"unknown term order {self.kind}")

    def key_function(self) -> Callable:
        if self.kind == "lex":
            return lambda m: m
        if self.kind == "grevlex":
            return _grevlex
        k = self.split
        return lambda m: _grevlex(m[:k]) + _grevlex(m[k:])

    def leading_monomial(self, p: MultiPoly):
        return max(p.terms, key=self.key_function())


def lex() -> TermOrder:
    return TermOrder("lex")


def grevlex() -> TermOrder:
    return TermOrder("grevlex")


def block(split: int) -> TermOrder:
    """Eliminate the first ``split`` variables: they form the leading block."""
    return TermOrder("block", split)


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _mono_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _mono_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


class _Engine:
    def __init__(self, nvars: int, order: TermOrder, budget: int, max_bits: int = DEFAULT_MAX_BITS):
        self.nvars = nvars
        self.key = order.key_function()
        self.budget = budget
        self.max_bits = max_bits
        self.steps = 0
        self.polys: list[dict] = []
        self.leads: list[tuple] = []
        self.sugars: list[int] = []

    def heap_key(self, m):
        return tuple(-x for x in self.key(m))

    def lead(self, terms: dict):
        return max(terms, key=self.key)

    def make_monic(self, terms: dict) -> tuple[dict, tuple]:
        lm = self.lead(terms)
        inv = 1 / terms[lm]
        if inv != 1:
            terms = {m: c * inv for m, c in terms.items()}
        return terms, lm

    def reduce(self, terms: dict, basis: Sequence[int], full: bool = True) -> dict:
        """Remainder of ``terms`` modulo the listed basis elements."""
        rem = dict(terms)
        heap = [(self.heap_key(m), m) for m in rem]
        heapq.heapify(heap)
        out = {}
        leads = [(self.leads[i], self.polys[i]) for i in basis]
        while heap:
            _, m = heapq.heappop(heap)
            c = rem.pop(m, None)
            if c is None:
                continue
            reducer = None
            for lm, g in leads:
                if _divides(lm, m):
                    reducer = (lm, g)
                    break
            if reducer is None:
                out[m] = c
                if not full:
                    # top reduction only: keep the rest untouched
                    for mm, cc in rem.items():
                        out[mm] = cc
                    return out
                continue
            lm, g = reducer
            self.steps += len(g) - 1
            if self.steps > self.budget:
                raise EliminationBudgetExceeded(self.steps, self.budget)
            if c.numerator.bit_length() > self.max_bits or c.denominator.bit_length() > self.max_bits:
                raise EliminationBudgetExceeded(
                    self.steps, self.budget, f"coefficient height above {self.max_bits} bits"
                )
            shift = _mono_sub(m, lm)
            for gm, gc in g.items():
                if gm == lm:
                    continue
                mm = _mono_add(gm, shift)
                old = rem.get(mm)
                if old is None:
                    rem[mm] = -c * gc
                    heapq.heappush(heap, (self.heap_key(mm), mm))
                else:
                    new = old - c * gc
                    if new:
                        rem[mm] = new
                    else:
                        del rem[mm]
        return out

    def spoly(self, i: int, j: int) -> dict:
        fi, fj = self.polys[i], self.polys[j]
        li, lj = self.leads[i], self.leads[j]
        lcm = _lcm(li, lj)
        si, sj = _mono_sub(lcm, li), _mono_sub(lcm, lj)
        out = {}
        for m, c in fi.items():
            if m != li:
                out[_mono_add(m, si)] = c
        for m, c in fj.items():
            if m == lj:
                continue
            mm = _mono_add(m, sj)
            v = out.get(mm, mpq(0)) - c
            if v:
                out[mm] = v
            else:
                out.pop(mm, None)
        return out

    def add(self, terms: dict, sugar: int) -> int:
        terms, lm = self.make_monic(terms)
        self.polys.append(terms)
        self.leads.append(lm)
        self.sugars.append(sugar)
        return len(self.polys) - 1

    def pair_sugar(self, i: int, j: int) -> int:
        lcm = _lcm(self.leads[i], self.leads[j])
        d = sum(lcm)
        return max(self.sugars[i] + d - sum(self.leads[i]), self.sugars[j] + d - sum(self.leads[j]))

    def update(self, G: list[int], B: list[tuple[int, int]], ih: int):
        """Gebauer-Moeller installation of a new element ``ih``."""
        mh = self.leads[ih]
        C = list(G)
        D = []
        while C:
            ig = C.pop(0)
            mg = self.leads[ig]
            lcm_hg = _lcm(mh, mg)
            coprime = _mono_add(mh, mg) == lcm_hg

            def lcm_divides(ip):
                return _divides(_lcm(mh, self.leads[ip]), lcm_hg)

            if coprime or (not any(lcm_divides(ip) for ip in C) and not any(lcm_divides(p[1]) for p in D)):
                D.append((ih, ig))
        E = []
        for ih_, ig in D:
            mg = self.leads[ig]
            if _mono_add(mh, mg) != _lcm(mh, mg):
                E.append((ih_, ig))
        B_new = []
        for ig1, ig2 in B:
            m1, m2 = self.leads[ig1], self.leads[ig2]
            lcm12 = _lcm(m1, m2)
            if not _divides(mh, lcm12) or _lcm(m1, mh) == lcm12 or _lcm(m2, mh) == lcm12:
                B_new.append((ig1, ig2))
        B_new.extend(E)
        G_new = [ig for ig in G if not _divides(mh, self.leads[ig])]
        G_new.append(ih)
        return G_new, B_new


def _to_terms(p: MultiPoly) -> dict:
    return dict(p.terms)


def groebner_basis(
    gens: Sequence[MultiPoly],
    order: TermOrder,
    budget: int = DEFAULT_BUDGET,
    stats: dict | None = None,
    max_bits: int = DEFAULT_MAX_BITS,
) -> list[MultiPoly]:
    """Reduced Groebner basis of the ideal generated by ``gens``.

    Elements are returned in primitive integer form (positive leading
    coefficient), sorted by increasing leading monomial.
    """
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        raise ValueError("groebner_basis needs at least one nonzero generator")
    nvars = gens[0].nvars
    for g in gens:
        if g.nvars != nvars:
            raise ValueError("generators live in different variable spaces")
    eng = _Engine(nvars, order, budget, max_bits)
    one = [MultiPoly.constant(nvars, 1)]
    G: list[int] = []
    B: list[tuple[int, int]] = []
    for g in sorted(gens, key=lambda p: eng.key(eng.lead(p.terms))):
        if g.is_constant():
            return one
        ih = eng.add(_to_terms(g), int(g.degree()))
        G, B = eng.update(G, B, ih)
    while B:
        best = min(
            range(len(B)),
            key=lambda k: (eng.pair_sugar(*B[k]), eng.key(_lcm(eng.leads[B[k][0]], eng.leads[B[k][1]]))),
        )
        i, j = B.pop(best)
        sugar = eng.pair_sugar(i, j)
        h = eng.reduce(eng.spoly(i, j), G)
        if not h:
            continue
        if len(h) == 1 and not any(next(iter(h))):
            if stats is not None:
                stats["steps"] = eng.steps
            return one
        ih = eng.add(h, sugar)
        G, B = eng.update(G, B, ih)
    # minimal basis, then interreduction
    G = [ig for ig in G if not any(jg != ig and _divides(eng.leads[jg], eng.leads[ig]) for jg in G)]
    reduced = []
    for ig in G:
        others = [jg for jg in G if jg != ig]
        r = eng.reduce(eng.polys[ig], others)
        reduced.append(MultiPoly(nvars, r, _normalized=True))
    if stats is not None:
        stats["steps"] = eng.steps
    reduced.sort(key=lambda p: eng.key(eng.lead(p.terms)))
    return [p.primitive() for p in reduced]


def reduce_poly(p: MultiPoly, basis: Sequence[MultiPoly], order: TermOrder) -> MultiPoly:
    """Normal form of ``p`` modulo ``basis`` (a full multivariate division)."""
    if p.is_zero():
        return p
    eng = _Engine(p.nvars, order, budget=10**12)
    idx = [eng.add(_to_terms(b), 0) for b in basis if not b.is_zero()]
    return MultiPoly(p.nvars, eng.reduce(_to_terms(p), idx), _normalized=True)


def s_polynomial(f: MultiPoly, g: MultiPoly, order: TermOrder) -> MultiPoly:
    eng = _Engine(f.nvars, order, budget=10**12)
    i = eng.add(_to_terms(f), 0)
    j = eng.add(_to_terms(g), 0)
    return MultiPoly(f.nvars, eng.spoly(i, j), _normalized=True)


def is_groebner_basis(basis: Sequence[MultiPoly], order: TermOrder) -> bool:
    """Buchberger's criterion: every S-polynomial reduces to zero."""
    basis = [b for b in basis if not b.is_zero()]
    for a in range(len(basis)):
        for b in range(a + 1, len(basis)):
            if not reduce_poly(s_polynomial(basis[a], basis[b], order), basis, order).is_zero():
                return False
    return True


def elimination_part(basis: Sequence[MultiPoly], eliminated: Sequence[int]) -> list[MultiPoly]:
    """Basis elements free of the eliminated variables."""
    drop = set(eliminated)
    return [g for g in basis if not (g.variables_used() & drop)]
