"""Critical and tangency systems for each active set of inequality constraints.

For an active set J the stationarity rows read

    grad f + sum_i lambda_i grad g_i - sum_{j in J} nu_j grad h_j + mu * x = 0

where the ``mu * x`` term is present only in tangency systems and only touches
the original (non-lifted) coordinates, i.e. the coordinates that define the
radius.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .poly import MultiPoly
from .problem import Problem

ACTIVE_SET_CAP = 10


class ActiveSetCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class ActiveSet:
    """Indices (0-based) of the inequalities treated as equalities."""

    active: tuple[int, ...]
    m: int

    @property
    def inactive(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.m) if j not in self.active)

    def label(self) -> str:
        return "{" + ",".join(str(j + 1) for j in self.active) + "}"


def enumerate_active_sets(problem: Problem, cap: int = ACTIVE_SET_CAP) -> list[ActiveSet]:
    m = len(problem.inequalities)
    if m > cap:
        raise ActiveSetCapExceeded(
            f"active-set cap exceeded: {m} inequalities > {cap}; simplify the constraint description"
        )
    out = []
    for size in range(m + 1):
        for combo in itertools.combinations(range(m), size):
            out.append(ActiveSet(combo, m))
    return out


def fresh_name(base: str, taken: set[str]) -> str:
    name = base
    while name in taken:
        name += "_"
    taken.add(name)
    return name


@dataclass
class TangencySystem:
    """Equations and sign conditions in (x, lambda, nu, [mu], [t], [y])."""

    problem: Problem
    active_set: ActiveSet
    names: tuple[str, ...]
    n_x: int
    lam_idx: tuple[int, ...]
    nu_idx: tuple[int, ...]
    mu_idx: int | None
    t_idx: int | None
    y_idx: int | None
    stationarity: list[MultiPoly]
    constraint_eqs: list[MultiPoly]
    sphere_equation: MultiPoly | None = None
    value_equation: MultiPoly | None = None
    sign_conditions: list[tuple[MultiPoly, str]] = field(default_factory=list)

    @property
    def nvars(self) -> int:
        return len(self.names)

    @property
    def kind(self) -> str:
        return "critical" if self.mu_idx is None else "tangency"

    @property
    def equations(self) -> list[MultiPoly]:
        return self.stationarity + self.constraint_eqs

    def all_equations(self) -> list[MultiPoly]:
        eqs = list(self.equations)
        if self.sphere_equation is not None:
            eqs.append(self.sphere_equation)
        if self.value_equation is not None:
            eqs.append(self.value_equation)
        return eqs

    @property
    def unknowns(self) -> tuple[int, ...]:
        """Indices of x and multiplier variables (everything but t and y)."""
        return tuple(i for i in range(self.nvars) if i not in (self.t_idx, self.y_idx))

    def embed(self, p: MultiPoly) -> MultiPoly:
        """Move a polynomial in the problem variables into this system's ring."""
        return p.remap(self.nvars, list(range(p.nvars)))

    def describe(self) -> list[str]:
        return [p.to_str(self.names) for p in self.all_equations()]


def _build(problem: Problem, J: ActiveSet, tangency: bool, with_sphere: bool, with_value: bool) -> TangencySystem:
    n = problem.nvars
    taken = set(problem.vars)
    names = list(problem.vars)
    lam_idx, nu_idx = [], []
    for i in range(len(problem.equalities)):
        lam_idx.append(len(names))
        names.append(fresh_name(f"lambda{i + 1}", taken))
    for j in J.active:
        nu_idx.append(len(names))
        names.append(fresh_name(f"nu{j + 1}", taken))
    mu_idx = t_idx = y_idx = None
    if tangency:
        mu_idx = len(names)
        names.append(fresh_name("mu", taken))
    if with_sphere:
        t_idx = len(names)
        names.append(fresh_name("t", taken))
    if with_value:
        y_idx = len(names)
        names.append(fresh_name("v", taken))
    N = len(names)
    embed = list(range(n))

    def lift(p: MultiPoly) -> MultiPoly:
        return p.remap(N, embed)

    def var(i: int) -> MultiPoly:
        return MultiPoly.variable(N, i)

    f = lift(problem.objective)
    gs = [lift(g) for g in problem.equalities]
    hs = [lift(h) for h in problem.inequalities]
    sphere_vars = problem.sphere_vars
    rows = []
    for k in range(n):
        row = f.diff(k)
        for li, g in zip(lam_idx, gs):
            row = row + var(li) * g.diff(k)
        for ni, j in zip(nu_idx, J.active):
            row = row - var(ni) * hs[j].diff(k)
        if tangency and k in sphere_vars:
            row = row + var(mu_idx) * var(k)
        rows.append(row)
    cons = list(gs) + [hs[j] for j in J.active]
    sphere = None
    if with_sphere:
        sphere = MultiPoly.zero(N)
        for k in sphere_vars:
            sphere = sphere + var(k) * var(k)
        sphere = sphere - var(t_idx) * var(t_idx)
    value = var(y_idx) - f if with_value else None
    signs = [(var(ni), ">=0") for ni in nu_idx] + [(hs[j], ">0") for j in J.inactive]
    return TangencySystem(
        problem,
        J,
        tuple(names),
        n,
        tuple(lam_idx),
        tuple(nu_idx),
        mu_idx,
        t_idx,
        y_idx,
        rows,
        cons,
        sphere,
        value,
        signs,
    )


def build_critical_system(problem: Problem, J: ActiveSet, with_value: bool = False) -> TangencySystem:
    return _build(problem, J, tangency=False, with_sphere=False, with_value=with_value)


def build_tangency_system(
    problem: Problem, J: ActiveSet, with_sphere: bool = True, with_value: bool = True
) -> TangencySystem:
    return _build(problem, J, tangency=True, with_sphere=with_sphere, with_value=with_value)


def drop_mu(sys: TangencySystem) -> list[MultiPoly]:
    """Stationarity and constraint rows with mu set to zero (the critical rows)."""
    if sys.mu_idx is None:
        return list(sys.equations)
    return [p.subs(sys.mu_idx, 0) for p in sys.equations]
