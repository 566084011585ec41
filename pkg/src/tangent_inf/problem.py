"""Optimization problems over basic closed semi-algebraic sets, and their files.

A problem is: minimize ``objective`` subject to ``g = 0`` for every equality
and ``h >= 0`` for every inequality.  Absolute values are handled by lifting:
``z = |e|`` becomes the new variable ``z`` with ``z^2 - e^2 = 0`` and ``z >= 0``.
"""

from __future__ import annotations

import os
import re
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

from .poly import MultiPoly, PolyParseError, parse_poly

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
KEYS = ("vars", "abs", "objective", "eq", "ineq", "regular")


class ProblemError(ValueError):
    """Malformed problem description."""


@dataclass(frozen=True)
class LiftingRecord:
    """Bookkeeping for one ``z = |e|`` lifting."""

    variable: str
    expression: str
    equality: MultiPoly
    inequality: MultiPoly
    note: str = "every lifted feasible point with z = |e| keeps the original objective value"

    def canonical_value(self, expression: MultiPoly, point: Sequence) -> mpq:
        """The value |e(point)| that the lifted variable takes at ``point``."""
        return abs(expression.eval_exact(point))


@dataclass(frozen=True)
class Problem:
    vars: tuple[str, ...]
    objective: MultiPoly
    equalities: tuple[MultiPoly, ...] = ()
    inequalities: tuple[MultiPoly, ...] = ()
    regular: bool = True
    liftings: tuple[LiftingRecord, ...] = ()
    n_base: int = field(default=-1)

    def __post_init__(self):
        if not self.vars:
            raise ProblemError("empty variable list")
        if len(set(self.vars)) != len(self.vars):
            raise ProblemError("duplicate variable names")
        n = len(self.vars)
        for p in (self.objective, *self.equalities, *self.inequalities):
            if p.nvars != n:
                raise ProblemError("all polynomials must use the problem's variable list")
        if self.n_base < 0:
            object.__setattr__(self, "n_base", n - len(self.liftings))

    @property
    def nvars(self) -> int:
        return len(self.vars)

    @property
    def sphere_vars(self) -> tuple[int, ...]:
        """Indices of the original (non-lifted) coordinates that define the radius."""
        return tuple(range(self.n_base))

    def fmt(self, p: MultiPoly) -> str:
        return p.to_str(self.vars)

    def is_constant_objective(self) -> bool:
        return self.objective.is_constant()

    def to_dict(self) -> dict:
        return {
            "vars": list(self.vars),
            "objective": self.fmt(self.objective),
            "equalities": [self.fmt(g) for g in self.equalities],
            "inequalities": [self.fmt(h) for h in self.inequalities],
            "regular": self.regular,
            "liftings": [
                {"variable": r.variable, "abs_of": r.expression, "note": r.note} for r in self.liftings
            ],
        }


def _eq_key(p: MultiPoly):
    return p.primitive()


def _ineq_key(p: MultiPoly):
    q = p.primitive()
    lead = max(p.terms, key=lambda m: (sum(m), m)) if p.terms else None
    if lead is not None and p.terms[lead] < 0:
        q = -q
    return q


def _dedupe(polys, key) -> tuple[MultiPoly, ...]:
    seen = []
    out = []
    for p in polys:
        if p.is_zero():
            continue
        k = key(p)
        if k not in seen:
            seen.append(k)
            out.append(p)
    return tuple(out)


def make_problem(
    vars: Sequence[str],
    objective: str,
    equalities: Sequence[str] = (),
    inequalities: Sequence[str] = (),
    regular: bool = True,
    abs_defs: Sequence[tuple[str, str]] = (),
) -> Problem:
    """Build a problem from expression strings; ``abs_defs`` lists ``(z, e)`` liftings."""
    base = Problem(
        tuple(vars),
        MultiPoly.zero(len(vars)),
        regular=regular,
        n_base=len(vars),
    )
    for name, text in abs_defs:
        base = lift_abs(base, text, name)[0]
    names = base.vars
    try:
        obj = parse_poly(objective, names)
        eqs = [parse_poly(e, names) for e in equalities]
        ineqs = [parse_poly(h, names) for h in inequalities]
    except PolyParseError as exc:
        raise ProblemError(str(exc)) from exc
    return Problem(
        names,
        obj,
        _dedupe(list(base.equalities) + eqs, _eq_key),
        _dedupe(list(base.inequalities) + ineqs, _ineq_key),
        regular,
        base.liftings,
        base.n_base,
    )


def lift_abs(problem: Problem, expression: MultiPoly | str, new_var: str) -> tuple[Problem, LiftingRecord]:
    """Add ``new_var = |expression|`` as a variable with z^2 = e^2 and z >= 0.

    The objective is carried over unchanged (embedded in the larger ring);
    callers write the lifted objective in terms of ``new_var``.
    """
    if new_var in problem.vars:
        raise ProblemError(f"lifting variable '{new_var}' clashes with an existing variable")
    if not _NAME.match(new_var):
        raise ProblemError(f"invalid variable name '{new_var}'")
    if isinstance(expression, str):
        try:
            expression = parse_poly(expression, problem.vars)
        except PolyParseError as exc:
            raise ProblemError(str(exc)) from exc
    n = problem.nvars
    names = problem.vars + (new_var,)
    embed = list(range(n))
    z = MultiPoly.variable(n + 1, n)
    e = expression.remap(n + 1, embed)
    record = LiftingRecord(new_var, expression.to_str(problem.vars), z * z - e * e, z)
    lifted = Problem(
        names,
        problem.objective.remap(n + 1, embed),
        _dedupe([g.remap(n + 1, embed) for g in problem.equalities] + [record.equality], _eq_key),
        _dedupe([h.remap(n + 1, embed) for h in problem.inequalities] + [record.inequality], _ineq_key),
        problem.regular,
        problem.liftings + (record,),
        problem.n_base,
    )
    return lifted, record


def canonical_lift(problem: Problem, base_point: Sequence) -> list[mpq]:
    """Extend a point in the original coordinates by the lifted values z = |e|."""
    point = [mpq(Fraction(v)) if isinstance(v, (int, Fraction)) else mpq(v) for v in base_point]
    if len(point) != problem.n_base:
        raise ValueError("point must have one coordinate per original variable")
    for k, rec in enumerate(problem.liftings):
        names = problem.vars[: problem.n_base + k]
        expr = parse_poly(rec.expression, names)
        point.append(rec.canonical_value(expr, point))
    return point


# -- files -----------------------------------------------------------------------

def parse_problem_text(text: str, source: str = "<string>") -> Problem:
    vars_: list[str] | None = None
    objective = None
    eqs: list[str] = []
    ineqs: list[str] = []
    abs_defs: list[tuple[str, str]] = []
    regular = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ProblemError(f"{source}:{lineno}: expected 'key: value'")
        key, value = (s.strip() for s in line.split(":", 1))
        if key not in KEYS:
            raise ProblemError(f"{source}:{lineno}: unknown key '{key}'")
        if key == "vars":
            if vars_ is not None:
                raise ProblemError(f"{source}:{lineno}: 'vars' given twice")
            vars_ = value.split()
            for name in vars_:
                if not _NAME.match(name):
                    raise ProblemError(f"{source}:{lineno}: invalid variable name '{name}'")
        elif key == "objective":
            if objective is not None:
                raise ProblemError(f"{source}:{lineno}: 'objective' given twice")
            objective = (value, lineno)
        elif key == "eq":
            eqs.append((value, lineno))
        elif key == "ineq":
            ineqs.append((value, lineno))
        elif key == "abs":
            if "=" not in value:
                raise ProblemError(f"{source}:{lineno}: expected 'abs: <name> = <expr>'")
            name, expr = (s.strip() for s in value.split("=", 1))
            abs_defs.append((name, expr, lineno))
        elif key == "regular":
            if value.lower() not in ("true", "false"):
                raise ProblemError(f"{source}:{lineno}: regular must be true or false")
            regular = value.lower() == "true"
    if not vars_:
        raise ProblemError(f"{source}: empty variable list")
    if objective is None:
        raise ProblemError(f"{source}: objective missing")

    problem = Problem(tuple(vars_), MultiPoly.zero(len(vars_)), regular=regular, n_base=len(vars_))
    for name, expr, lineno in abs_defs:
        try:
            problem = lift_abs(problem, expr, name)[0]
        except ProblemError as exc:
            raise ProblemError(f"{source}:{lineno}: {exc}") from exc

    def parse(text_line):
        text_, lineno = text_line
        try:
            return parse_poly(text_, problem.vars)
        except PolyParseError as exc:
            raise ProblemError(f"{source}:{lineno}: {exc}") from exc

    return Problem(
        problem.vars,
        parse(objective),
        _dedupe(list(problem.equalities) + [parse(e) for e in eqs], _eq_key),
        _dedupe(list(problem.inequalities) + [parse(h) for h in ineqs], _ineq_key),
        regular,
        problem.liftings,
        problem.n_base,
    )


def load_problem(path: str | os.PathLike) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem_text(fh.read(), str(path))


def problem_text(problem: Problem) -> str:
    lifted_eqs = [r.equality for r in problem.liftings]
    lifted_ineqs = [r.inequality for r in problem.liftings]
    lines = [f"vars: {' '.join(problem.vars[: problem.n_base])}"]
    for rec in problem.liftings:
        lines.append(f"abs: {rec.variable} = {rec.expression}")
    lines.append(f"objective: {problem.fmt(problem.objective)}")
    for g in problem.equalities:
        if g not in lifted_eqs:
            lines.append(f"eq: {problem.fmt(g)}")
    for h in problem.inequalities:
        if h not in lifted_ineqs:
            lines.append(f"ineq: {problem.fmt(h)}")
    lines.append(f"regular: {'true' if problem.regular else 'false'}")
    return "\n".join(lines) + "\n"


def save_problem(problem: Problem, path: str | os.PathLike) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".problem-", suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(problem_text(problem))
    os.replace(tmp, path)


def check_unbounded_domain(problem: Problem, radii: Sequence[float], cfg=None):
    """Numeric evidence that the feasible set meets every sampled sphere.

    Returns ``(True, witnesses)`` or ``(False, failing_radius)``.
    """
    from .oracle import OracleConfig, sphere_feasible_point

    if not radii:
        raise ValueError("radii must be nonempty")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing")
    cfg = cfg or OracleConfig()
    witnesses = []
    for t in radii:
        point = sphere_feasible_point(problem, t, cfg)
        if point is None:
            return False, t
        witnesses.append(point)
    return True, witnesses
