"""Projection of tangency and critical systems onto the (radius, value) plane.

The sphere parameter only enters as ``t^2``, so the elimination works with
``u = t^2``: a plane curve is stored as ``P(u, v)`` and read in ``t`` through
``P(t^2, v)``.

The pipeline, per active set:

1. linear substitution of unknowns that occur linearly with a constant
   coefficient;
2. splitting into components along the irreducible factors of the equations;
3. per component, a block-order Groebner basis under a step budget, falling
   back to iterated resultants when the budget runs out;
4. the gcd of the surviving (u, v) equations gives the component's curve, and
   the curve of the active set is the squarefree product over components.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import sympy
from gmpy2 import mpq

from . import polyalg
from . import univariate as up
from .algebraic import RealAlgebraic
from .groebner import DEFAULT_BUDGET, EliminationBudgetExceeded, block, elimination_part, groebner_basis
from .poly import MultiPoly
from .systems import TangencySystem

COMPONENT_CAP = 64
CONFIRM_BUDGET = 200_000


class NonGenericSystem(RuntimeError):
    """The elimination ideal is zero: the projection fills the whole plane."""


class PositiveDimensionalCriticalValues(RuntimeError):
    """Critical values are not finite: regularity is violated."""


@dataclass
class EliminationStats:
    components: int = 0
    groebner_components: int = 0
    resultant_components: int = 0
    steps: int = 0
    budget_failures: int = 0
    rechecked: int = 0
    dropped: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def method(self) -> str:
        if self.resultant_components and self.groebner_components:
            return "mixed"
        if self.resultant_components:
            return "resultant"
        return "groebner"

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "components": self.components,
            "groebner_components": self.groebner_components,
            "resultant_components": self.resultant_components,
            "reduction_steps": self.steps,
            "budget_failures": self.budget_failures,
            "rechecked_components": self.rechecked,
            "dropped_factors": self.dropped,
        }


@dataclass
class PlaneCurve:
    """Squarefree ``P(u, v)`` with ``u = t^2``; ``factors`` are its irreducible factors."""

    P: MultiPoly
    factors: list[MultiPoly]
    active_set: str
    stats: EliminationStats

    def in_t(self) -> MultiPoly:
        """The same curve written as a polynomial in (t, v)."""
        return MultiPoly(2, {(2 * m[0], m[1]): c for m, c in self.P.terms.items()})

    def to_str(self) -> str:
        return self.in_t().to_str(["t", "v"])

    @property
    def is_empty(self) -> bool:
        return self.P.is_constant()


@dataclass
class CriticalValuePoly:
    q: list  # dense univariate coefficients in v
    roots: list[RealAlgebraic]
    active_set: str
    stats: EliminationStats

    def to_str(self) -> str:
        from .algebraic import poly_str

        return poly_str(self.q, "v")


# -- conversions -------------------------------------------------------------------

def _to_sympy(p: MultiPoly, gens):
    return sympy.Poly.from_dict(
        {m: sympy.Rational(int(c.numerator), int(c.denominator)) for m, c in p.terms.items()},
        *gens,
        domain=sympy.QQ,
    )


def _from_sympy(poly, nvars: int) -> MultiPoly:
    return MultiPoly(
        nvars, {tuple(m): mpq(int(c.p), int(c.q)) for m, c in poly.as_dict().items()}
    )


_factor_cache: dict = {}


def irreducible_factors(p: MultiPoly) -> list[MultiPoly]:
    """Distinct irreducible factors over Q in primitive form (via sympy)."""
    if p.is_constant():
        return []
    key = p.primitive()
    hit = _factor_cache.get(key)
    if hit is not None:
        return hit
    used = sorted(p.variables_used())
    gens = sympy.symbols(f"w0:{len(used)}")
    compact = p.remap(len(used), [used.index(i) if i in used else 0 for i in range(p.nvars)])
    _, facs = _to_sympy(compact, gens).factor_list()
    out = []
    for f, _mult in facs:
        back = _from_sympy(f, len(used))
        out.append(back.remap(p.nvars, used).primitive())
    out.sort(key=lambda q: (len(q), q.to_str()))
    if len(_factor_cache) > 20000:
        _factor_cache.clear()
    _factor_cache[key] = out
    return out


# -- component decomposition --------------------------------------------------------

def _linear_pivot(eqs: Sequence[MultiPoly], elim: set[int]):
    best = None
    for k, e in enumerate(eqs):
        for w in sorted(e.variables_used() & elim):
            if polyalg.degree_in(e, w) != 1:
                continue
            coeffs = polyalg.coeffs_in(e, w)
            lead = coeffs[1]
            if lead.is_constant():
                score = (len(e), w)
                if best is None or score < best[0]:
                    best = (score, k, w, lead.constant_term(), coeffs.get(0))
    return best


def simplify(eqs: Sequence[MultiPoly], elim: set[int]) -> list[MultiPoly] | None:
    """Linear substitutions plus normalization; ``None`` means inconsistent."""
    eqs = list(eqs)
    while True:
        seen = []
        for e in eqs:
            if e.is_zero():
                continue
            if e.is_constant():
                return None
            e = e.primitive()
            if e not in seen:
                seen.append(e)
        eqs = seen
        piv = _linear_pivot(eqs, elim)
        if piv is None:
            return eqs
        _, k, w, c, rest = piv
        rest = rest if rest is not None else MultiPoly.zero(eqs[k].nvars)
        value = rest.scale(-1 / c)
        eqs = [e.subs(w, value) for j, e in enumerate(eqs) if j != k]


def _first_reducible(eqs):
    for k, e in enumerate(eqs):
        facs = irreducible_factors(e)
        if len(facs) > 1:
            return k, facs
    return None


def decompose(eqs: Sequence[MultiPoly], elim: set[int], cap: int = COMPONENT_CAP) -> list[list[MultiPoly]]:
    """Split the solution set into components whose equations are irreducible."""
    stack = [list(eqs)]
    done = []
    while stack:
        comp = simplify(stack.pop(), elim)
        if comp is None:
            continue
        split = None if len(done) + len(stack) >= cap else _first_reducible(comp)
        if split is None:
            done.append(comp)
            continue
        k, facs = split
        for f in reversed(facs):
            stack.append(comp[:k] + [f] + comp[k + 1:])
    return done


# -- resultant route -----------------------------------------------------------------

def resultant_eliminate(
    eqs: Sequence[MultiPoly],
    elim: set[int],
    cap: int = COMPONENT_CAP,
    recheck: Callable[[list[MultiPoly]], list[list[MultiPoly]]] | None = None,
) -> list[list[MultiPoly]]:
    """Iterated resultants; returns components described by equations free of ``elim``.

    The result over-approximates the projection: a variable that survives in a
    single equation is projected away by dropping that equation.  A component
    that loses every equation is usually an extraneous resultant factor; when
    ``recheck`` is given it is handed the original equations plus the factors
    chosen on the way down, and its answer replaces the empty component.
    """
    stack = [(list(eqs), list(eqs))]
    done = []
    while stack:
        raw, ancestry = stack.pop()
        comp = simplify(raw, elim)
        if comp is None:
            continue
        split = None if len(done) + len(stack) >= cap else _first_reducible(comp)
        if split is not None:
            k, facs = split
            for f in reversed(facs):
                stack.append((comp[:k] + [f] + comp[k + 1:], ancestry + [f]))
            continue
        present = set()
        for e in comp:
            present |= e.variables_used() & elim
        if not present:
            if not comp and recheck is not None and len(ancestry) > len(eqs):
                done.extend(recheck(ancestry))
            else:
                done.append(comp)
            continue

        def cost(w):
            holders = [e for e in comp if e.involves(w)]
            return (len(holders), min(polyalg.degree_in(e, w) for e in holders), w)

        w = min(present, key=cost)
        holders = [e for e in comp if e.involves(w)]
        others = [e for e in comp if not e.involves(w)]
        if len(holders) == 1:
            stack.append((others, ancestry))
            continue
        pivot = min(holders, key=lambda e: (polyalg.degree_in(e, w), len(e)))
        new = []
        for e in holders:
            if e is pivot:
                continue
            r = polyalg.resultant(pivot, e, w)
            if not r.is_zero():
                new.append(r)
        stack.append((others + new, ancestry))
    return done


# -- the elimination ring ---------------------------------------------------------------

def _elimination_ring(sys: TangencySystem):
    """Reorder variables as (unknowns..., u, v) with u = t^2; returns (eqs, n_elim)."""
    unknowns = list(sys.unknowns)
    keep = [i for i in (sys.t_idx, sys.y_idx) if i is not None]
    order = unknowns + keep
    pos = {old: new for new, old in enumerate(order)}
    N = len(order)
    out = []
    for p in sys.all_equations():
        terms = {}
        for m, c in p.terms.items():
            mm = [0] * N
            for i, e in enumerate(m):
                if not e:
                    continue
                if i == sys.t_idx:
                    if e % 2:
                        raise ValueError("the sphere parameter must enter through t^2 only")
                    e //= 2
                mm[pos[i]] = e
            terms[tuple(mm)] = c
        out.append(MultiPoly(N, terms))
    return out, len(unknowns)


def _eliminate_components(eqs, n_elim, budget, stats: EliminationStats, force: str | None):
    """Yield per-component lists of equations in the kept variables only."""
    elim = set(range(n_elim))
    comps = decompose(eqs, elim)
    stats.components = len(comps)
    results = []
    for comp in comps:
        used = set().union(*(e.variables_used() for e in comp)) if comp else set()
        if not used & elim:
            stats.groebner_components += 1
            results.append(comp)
            continue
        if force != "resultant":
            info = {}
            try:
                G = groebner_basis(comp, block(n_elim), budget=budget, stats=info)
            except EliminationBudgetExceeded as exc:
                stats.budget_failures += 1
                stats.steps += exc.steps
                if force == "groebner":
                    raise
                stats.notes.append(str(exc))
            else:
                stats.steps += info.get("steps", 0)
                stats.groebner_components += 1
                if len(G) == 1 and G[0].is_constant():
                    continue
                results.append(elimination_part(G, range(n_elim)))
                continue
        stats.resultant_components += 1

        def recheck(ancestry, stats=stats):
            stats.rechecked += 1
            try:
                G = groebner_basis(ancestry, block(n_elim), budget=budget)
            except EliminationBudgetExceeded:
                return [[]]
            if len(G) == 1 and G[0].is_constant():
                return []
            return [elimination_part(G, range(n_elim))]

        for part in resultant_eliminate(comp, elim, recheck=recheck):
            confirmed = _confirm_part(comp, part, n_elim, min(budget, CONFIRM_BUDGET), stats)
            if confirmed is not None:
                results.append(confirmed)
    return results


def _confirm_part(comp, part, n_elim: int, budget: int, stats: EliminationStats):
    """Drop factors that the resultant route introduced but the component never reaches.

    A factor phi of the projected equations is genuine when the elimination
    ideal of ``comp + [phi]`` is generated by multiples of phi alone; if the
    ideal is the unit ideal, or also contains a polynomial that phi does not
    divide, the component only meets phi in finitely many points.  Factors
    whose check runs out of budget are kept.
    """
    polys = [p for p in part if not p.is_zero()]
    if not polys:
        return part
    g = MultiPoly.zero(polys[0].nvars)
    for p in polys:
        g = polyalg.gcd(g, p)
    if g.is_constant():
        return part
    keep = []
    for phi in irreducible_factors(polyalg.squarefree_part(g)):
        try:
            G = groebner_basis(list(comp) + [phi], block(n_elim), budget=budget)
        except EliminationBudgetExceeded:
            keep.append(phi)
            continue
        if len(G) == 1 and G[0].is_constant():
            stats.dropped += 1
            continue
        rest = elimination_part(G, range(n_elim))
        if all(polyalg.divides(phi, e) for e in rest):
            keep.append(phi)
        else:
            stats.dropped += 1
    if not keep:
        return None
    product = keep[0]
    for phi in keep[1:]:
        product = product * phi
    return [product]


def _shrink(p: MultiPoly, n_elim: int) -> MultiPoly:
    """Drop the eliminated slots of a polynomial that no longer uses them."""
    k = p.nvars - n_elim
    return MultiPoly(k, {m[n_elim:]: c for m, c in p.terms.items()}, _normalized=True)


def eliminate_to_plane_curve(
    sys: TangencySystem, budget: int = DEFAULT_BUDGET, force: str | None = None
) -> PlaneCurve:
    """Plane curve ``P(u, v)`` containing every (radius^2, value) of a real solution.

    ``force`` may be ``"groebner"`` or ``"resultant"`` to pin the engine.
    """
    if sys.t_idx is None or sys.y_idx is None:
        raise ValueError("tangency system needs the sphere and value equations")
    eqs, n_elim = _elimination_ring(sys)
    stats = EliminationStats()
    parts = _eliminate_components(eqs, n_elim, budget, stats, force)
    factors: list[MultiPoly] = []
    label = sys.active_set.label()
    for part in parts:
        polys = [_shrink(p, n_elim) for p in part if not p.is_zero()]
        if not polys:
            raise NonGenericSystem(
                f"active set {label}: a component projects onto the whole (t, value) plane; "
                "the problem is not generic enough for curve branches"
            )
        g = MultiPoly.zero(2)
        for p in polys:
            g = polyalg.gcd(g, p)
        if not g.involves(1):
            # a u-only (or constant) gcd: the component meets finitely many spheres
            continue
        g = polyalg.squarefree_part(g)
        for f in irreducible_factors(g):
            if f.involves(1) and f not in factors:
                factors.append(f)
    factors.sort(key=lambda q: (q.degree(), len(q), q.to_str(["u", "v"])))
    P = MultiPoly.constant(2, 1)
    for f in factors:
        P = P * f
    return PlaneCurve(P.primitive(), factors, label, stats)


def eliminate_to_critical_values(
    sys: TangencySystem, budget: int = DEFAULT_BUDGET, force: str | None = None
) -> CriticalValuePoly:
    """Univariate ``q(v)`` whose real roots contain every critical value."""
    if sys.y_idx is None or sys.mu_idx is not None or sys.t_idx is not None:
        raise ValueError("critical-value elimination needs a critical system with a value equation")
    eqs, n_elim = _elimination_ring(sys)
    stats = EliminationStats()
    parts = _eliminate_components(eqs, n_elim, budget, stats, force)
    label = sys.active_set.label()
    q = [mpq(1)]
    for part in parts:
        polys = [_shrink(p, n_elim) for p in part if not p.is_zero()]
        if not polys:
            raise PositiveDimensionalCriticalValues(
                f"active set {label}: critical values fill an interval; "
                "the regularity assumption is violated"
            )
        g: list = []
        for p in polys:
            g = up.gcd(g, up.from_multi(p, 0))
        if len(g) <= 1:
            continue
        q = up.mul(q, g)
    q = up.squarefree(q)
    roots = RealAlgebraic.roots_of(q) if len(q) > 1 else []
    return CriticalValuePoly(q, roots, label, stats)


def bivariate_resultant(p: MultiPoly, q: MultiPoly, var: int) -> MultiPoly:
    """Resultant with respect to variable index ``var`` (Sylvester determinant)."""
    return polyalg.resultant(p, q, var)
