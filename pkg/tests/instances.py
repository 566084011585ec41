"""Random small problem instances shared by the property and acceptance suites."""

from __future__ import annotations

import numpy as np

from tangent_inf.problem import Problem, make_problem

NAMES = ("x", "y", "w")


def _affine(coeffs, const, names) -> str:
    parts = [f"{int(c)}*{v}" for c, v in zip(coeffs, names) if c]
    parts.append(str(int(const)))
    return " + ".join(parts).replace("+ -", "- ")


def convex_quadratic_on_polyhedron(rng: np.random.Generator) -> Problem:
    """||M x||^2 + c.x over {a_j.x + b_j >= 0}; the origin is always feasible."""
    n = int(rng.integers(1, 4))
    names = NAMES[:n]
    rows = int(rng.integers(1, n + 1))
    M = rng.integers(-1, 2, size=(rows, n))
    c = rng.integers(-2, 3, size=n)
    squares = [f"({_affine(r, 0, names)})^2" for r in M if r.any()]
    linear = _affine(c, 0, names)
    objective = " + ".join(squares + [linear]).replace("+ -", "- ")
    m = int(rng.integers(0, 5))
    ineqs = []
    for _ in range(m):
        a = rng.integers(-2, 3, size=n)
        if a.any():
            ineqs.append(_affine(a, rng.integers(0, 3), names))
    return make_problem(names, objective, inequalities=ineqs)


def small_polynomial_problem(rng: np.random.Generator) -> Problem:
    """A random low-degree objective in two variables, sometimes with one inequality."""
    names = NAMES[:2]
    terms = []
    for _ in range(int(rng.integers(1, 4))):
        c = int(rng.integers(-3, 4)) or 1
        i, j = (int(k) for k in rng.integers(0, 3, size=2))
        terms.append(f"{c}*x^{i}*y^{j}")
    if rng.random() < 0.5:
        terms.append("x^4 + y^4")
    ineqs = []
    if rng.random() < 0.4:
        a = rng.integers(-1, 2, size=2)
        if a.any():
            ineqs.append(_affine(a, rng.integers(0, 2), names))
    return make_problem(names, " + ".join(terms).replace("+ -", "- "), inequalities=ineqs)
