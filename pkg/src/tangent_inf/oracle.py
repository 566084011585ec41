"""Floating-point evidence: sphere minima, polished system solutions, witnesses.

Nothing here is exact.  The symbolic pipeline only uses these results to
prune elimination artifacts (branches or critical values with no real
feasible solution behind them) and to cross-check its conclusions.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from gmpy2 import mpq
from scipy.optimize import minimize

from .poly import MultiPoly
from .problem import Problem
from .systems import ActiveSet, TangencySystem, build_critical_system, build_tangency_system


@dataclass(frozen=True)
class OracleConfig:
    starts: int = 64
    seed: int = 0
    max_iters: int = 500
    # geometric penalty schedule: initial weight, ratio, rounds (used by the feasibility probe)
    penalty_weight: float = 10.0
    penalty_ratio: float = 10.0
    penalty_rounds: int = 4
    tol_feas: float = 1e-9
    tol_grad: float = 1e-9

    def __post_init__(self):
        if self.starts < 1 or self.max_iters < 1:
            raise ValueError("starts and max_iters must be positive")
        if min(self.tol_feas, self.tol_grad, self.penalty_weight) <= 0 or self.penalty_ratio <= 1:
            raise ValueError("tolerances and penalty weights must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def rng_for(cfg: OracleConfig, label: str) -> np.random.Generator:
    """Independent, reproducible stream per call site."""
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, zlib.crc32(label.encode())]))


# -- compiled polynomial evaluation ---------------------------------------------------

class CompiledPolys:
    """Batch evaluation of a list of polynomials sharing one variable space."""

    def __init__(self, polys: Sequence[MultiPoly], nvars: int):
        monos = sorted({m for p in polys for m in p.terms})
        index = {m: k for k, m in enumerate(monos)}
        self.nvars = nvars
        self.m = len(polys)
        self.E = np.array(monos, dtype=float).reshape(len(monos), nvars)
        self.C = np.zeros((len(monos), len(polys)))
        for j, p in enumerate(polys):
            for mono, c in p.terms.items():
                self.C[index[mono], j] = float(c)
        self.absC = np.abs(self.C)

    def terms(self, X: np.ndarray) -> np.ndarray:
        if not len(self.E):
            return np.zeros((X.shape[0], 0))
        with np.errstate(over="ignore", invalid="ignore"):
            return np.prod(X[:, None, :] ** self.E[None, :, :], axis=2)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return self.terms(X) @ self.C

    def with_scale(self, X: np.ndarray):
        T = self.terms(X)
        with np.errstate(over="ignore", invalid="ignore"):
            return T @ self.C, np.abs(T) @ self.absC


class CompiledSystem:
    """Residuals and Jacobians of a polynomial system."""

    def __init__(self, polys: Sequence[MultiPoly], nvars: int):
        self.polys = list(polys)
        self.nvars = nvars
        self.F = CompiledPolys(self.polys, nvars)
        self.DF = CompiledPolys([p.diff(k) for p in self.polys for k in range(nvars)], nvars)

    @property
    def m(self) -> int:
        return len(self.polys)

    def residual(self, X: np.ndarray):
        F, S = self.F.with_scale(X)
        return F, 1.0 + S

    def jacobian(self, X: np.ndarray) -> np.ndarray:
        return self.DF(X).reshape(X.shape[0], self.m, self.nvars)


def exact_value(p: MultiPoly, x) -> float:
    """p at the float point x, evaluated in rational arithmetic.

    Float evaluation loses everything when large terms cancel (a constant
    value along a curve running off to infinity); the exact value at the
    rounded point is only off by the rounding of x itself.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        return math.nan
    val = p.eval_exact([mpq(float(v)) for v in x])
    try:
        return float(val)
    except OverflowError:  # a diverged iterate; saturate like float arithmetic
        return math.inf if val > 0 else -math.inf


def _safe_norm(A: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(A, axis=1)
    n[~np.isfinite(n)] = np.inf
    return n


@np.errstate(invalid="ignore", over="ignore")  # diverged rows end up with norm inf
def gauss_newton(
    system: CompiledSystem,
    X0: np.ndarray,
    free: Sequence[int],
    iters: int = 60,
    tol: float = 1e-15,
) -> tuple[np.ndarray, np.ndarray]:
    """Damped Gauss-Newton on row-scaled residuals, batched over starting points.

    Returns the final points and their scaled residual norms.
    """
    X = np.array(X0, dtype=float, copy=True)
    free = np.asarray(free, dtype=int)
    F, S = system.residual(X)
    nrm = _safe_norm(F / S)
    for _ in range(iters):
        live = nrm > tol
        if not live.any():
            break
        idx = np.nonzero(live)[0]
        Xl = X[idx]
        J = system.jacobian(Xl)[:, :, free] / S[idx][:, :, None]
        Fs = (F / S)[idx]
        J[~np.isfinite(J)] = 0.0
        # equilibrate: columns by variable size, rows to unit norm, so a row
        # whose residual vanishes cannot push other directions under the pinv cutoff
        D = 1.0 + np.abs(Xl[:, free])
        Jc = J * D[:, None, :]
        rn = np.linalg.norm(Jc, axis=2)
        rn[~(rn > 0)] = 1.0
        try:
            step = -(np.linalg.pinv(Jc / rn[..., None]) @ (Fs / rn)[..., None])[..., 0] * D
        except np.linalg.LinAlgError:
            break
        alpha = np.ones(len(idx))
        done = np.zeros(len(idx), dtype=bool)
        newX = Xl.copy()
        new_n = nrm[idx].copy()
        for _ls in range(12):
            Xt = Xl.copy()
            Xt[:, free] += alpha[:, None] * step
            Ft, St = system.residual(Xt)
            nt = _safe_norm(Ft / St)
            ok = (nt < nrm[idx]) & ~done
            newX[ok] = Xt[ok]
            new_n[ok] = nt[ok]
            done |= ok
            if done.all():
                break
            alpha[~done] *= 0.5
        if not done.any():
            break
        X[idx] = newX
        F, S = system.residual(X)
        nrm = _safe_norm(F / S)
    return X, nrm


# -- numeric tangency / critical systems -----------------------------------------------

class NumericSystem:
    """A tangency or critical system prepared for batched numerics.

    Columns are the system's variables plus one extra column holding the
    target objective value; ``t`` and the target column are never updated.
    """

    def __init__(self, sys: TangencySystem):
        if sys.y_idx is not None:
            raise ValueError("numeric systems are built without the value variable")
        self.sys = sys
        self.problem = sys.problem
        n = sys.nvars
        self.ncols = n + 1
        self.target_col = n
        embed = list(range(n))
        eqs = [p.remap(self.ncols, embed) for p in sys.equations]
        if sys.sphere_equation is not None:
            eqs.append(sys.sphere_equation.remap(self.ncols, embed))
        self.square = CompiledSystem(eqs, self.ncols)
        f = self.problem.objective.remap(self.ncols, list(range(self.problem.nvars)))
        target = MultiPoly.variable(self.ncols, self.target_col)
        self.targeted = CompiledSystem(eqs + [f - target], self.ncols)
        self.objective = CompiledPolys([f], self.ncols)
        self.mult_cols = list(sys.lam_idx) + list(sys.nu_idx) + ([sys.mu_idx] if sys.mu_idx is not None else [])
        self.fixed = [self.target_col] + ([sys.t_idx] if sys.t_idx is not None else [])
        self.free = [i for i in range(self.ncols) if i not in self.fixed]
        self.n_x = sys.n_x
        ineqs = [h.remap(self.ncols, list(range(self.problem.nvars))) for h in self.problem.inequalities]
        self.ineqs = CompiledPolys(ineqs, self.ncols) if ineqs else None
        # lifted column z with z^2 - e^2 = 0; keep -e^2 compiled for |e| recovery
        embed_p = list(range(self.problem.nvars))
        self.lifts = [
            (col, CompiledPolys([-(r.equality.subs(col, 0).remap(self.ncols, embed_p))], self.ncols))
            for col, r in ((self.problem.n_base + k, r) for k, r in enumerate(self.problem.liftings))
        ]

    # -- starting points -------------------------------------------------------
    def lift_columns(self, X: np.ndarray) -> None:
        """Set lifted coordinates to their canonical value |e(x)|."""
        for col, e2 in self.lifts:
            X[:, col] = np.sqrt(np.maximum(e2(X)[:, 0], 0.0))

    def fit_multipliers(self, X: np.ndarray) -> None:
        """Least-squares multipliers for the stationarity rows at fixed x."""
        if not self.mult_cols:
            return
        Z = X.copy()
        Z[:, self.mult_cols] = 0.0
        F, S = self.square.residual(Z)
        rows = list(range(self.n_x))
        J = self.square.jacobian(Z)[:, rows][:, :, self.mult_cols]
        r = F[:, rows]
        J[~np.isfinite(J)] = 0.0
        r[~np.isfinite(r)] = 0.0
        sol = -(np.linalg.pinv(J) @ r[..., None])[..., 0]
        X[:, self.mult_cols] = sol

    def sphere_starts(self, rng: np.random.Generator, t: float, count: int) -> np.ndarray:
        X = np.zeros((count, self.ncols))
        base = list(self.problem.sphere_vars)
        G = rng.standard_normal((count, len(base)))
        # a few structured directions first: coordinate axes and diagonals
        structured = []
        for k in range(len(base)):
            for sgn in (1.0, -1.0):
                d = np.zeros(len(base))
                d[k] = sgn
                structured.append(d)
        for signs in np.array(np.meshgrid(*[[1.0, -1.0]] * len(base))).T.reshape(-1, len(base)):
            structured.append(signs)
        structured = np.array(structured)[: count // 2]
        G[: len(structured)] = structured + 1e-3 * G[: len(structured)]
        G /= np.linalg.norm(G, axis=1, keepdims=True)
        X[:, base] = t * G
        if self.sys.t_idx is not None:
            X[:, self.sys.t_idx] = t
        self.lift_columns(X)
        self.fit_multipliers(X)
        return X

    def free_starts(self, rng: np.random.Generator, count: int, scales=(0.5, 2.0, 10.0)) -> np.ndarray:
        X = np.zeros((count, self.ncols))
        base = list(self.problem.sphere_vars)
        sc = np.array([scales[k % len(scales)] for k in range(count)])
        X[:, base] = rng.standard_normal((count, len(base))) * sc[:, None]
        X[0, base] = 0.0
        self.lift_columns(X)
        self.fit_multipliers(X)
        return X

    # -- checks -------------------------------------------------------------------
    def values(self, X: np.ndarray) -> np.ndarray:
        """Objective values, exact at each (rounded) point; see :func:`exact_value`."""
        f = self.problem.objective
        n = self.problem.nvars
        return np.array([exact_value(f, row[:n]) for row in X], dtype=float)

    def sign_ok(self, X: np.ndarray, tol: float = 1e-7) -> np.ndarray:
        ok = np.ones(X.shape[0], dtype=bool)
        for col in self.sys.nu_idx:
            ok &= X[:, col] >= -tol * (1 + np.abs(X[:, self.mult_cols]).max(axis=1))
        if self.ineqs is not None:
            H, S = self.ineqs.with_scale(X)
            for j in self.sys.active_set.inactive:
                ok &= H[:, j] >= -1e-9 * (1 + S[:, j])
        return ok

    def polish(self, X: np.ndarray, iters: int = 40):
        return gauss_newton(self.square, X, self.free, iters=iters)


_numeric_cache: dict = {}


def numeric_system(problem: Problem, J: ActiveSet, tangency: bool) -> NumericSystem:
    key = (id(problem), J, tangency)
    hit = _numeric_cache.get(key)
    if hit is not None and hit.problem is problem:
        return hit
    if tangency:
        sys = build_tangency_system(problem, J, with_sphere=True, with_value=False)
    else:
        sys = build_critical_system(problem, J, with_value=False)
    ns = NumericSystem(sys)
    if len(_numeric_cache) > 256:
        _numeric_cache.clear()
    _numeric_cache[key] = ns
    return ns


def _dedupe_rows(X: np.ndarray, cols: Sequence[int], rel: float = 1e-6) -> np.ndarray:
    keep = []
    for k in range(X.shape[0]):
        row = X[k, cols]
        if not any(np.all(np.abs(row - X[j, cols]) <= rel * (1 + np.abs(row))) for j in keep):
            keep.append(k)
    return X[keep]


RESIDUAL_TOL = 1e-8


def solve_system_numeric(sys: TangencySystem, t: float, cfg: OracleConfig, label: str = "") -> list[dict]:
    """Polished real solutions of a tangency system at radius ``t`` (multi-start)."""
    if t <= 0:
        raise ValueError("radius must be positive")
    ns = NumericSystem(sys) if sys.y_idx is None else NumericSystem(
        build_tangency_system(sys.problem, sys.active_set, with_sphere=True, with_value=False)
    )
    rng = rng_for(cfg, f"solve:{label}:{sys.active_set.label()}:{t!r}")
    X = ns.sphere_starts(rng, t, max(cfg.starts, 8))
    X, nrm = ns.polish(X, iters=80)
    good = X[nrm <= RESIDUAL_TOL]
    good = _dedupe_rows(good, ns.free)
    out = []
    signs = ns.sign_ok(good) if len(good) else []
    for k in range(len(good)):
        out.append(
            {
                "point": good[k, : sys.n_x].tolist(),
                "multipliers": good[k, ns.mult_cols].tolist(),
                "value": float(ns.values(good[k : k + 1])[0]),
                "signs_ok": bool(signs[k]),
            }
        )
    out.sort(key=lambda d: (d["value"], d["point"]))
    return out


def _accept(ns: NumericSystem, X: np.ndarray, nrm: np.ndarray, target: float, rel: float) -> np.ndarray:
    vals = ns.values(X)
    ok = (nrm <= RESIDUAL_TOL) & np.isfinite(vals)
    ok &= np.abs(vals - target) <= rel * abs(target) + 1e-12 * (1 + abs(target))
    ok &= ns.sign_ok(X)
    return ok


def targeted_solve(ns: NumericSystem, X: np.ndarray, target: float, rel: float = 1e-4):
    """Gauss-Newton with the value equation, then polish on the square system."""
    X = X.copy()
    X[:, ns.target_col] = target
    X, _ = gauss_newton(ns.targeted, X, ns.free, iters=60)
    X, nrm = ns.polish(X, iters=30)
    ok = _accept(ns, X, nrm, target, rel)
    return X, ok


def _best_row(ns: NumericSystem, X: np.ndarray, ok: np.ndarray, target: float):
    if not ok.any():
        return None
    cand = X[ok]
    err = np.abs(ns.values(cand) - target)
    order = np.lexsort(tuple(cand[:, ::-1].T) + (err,))
    return cand[order[0]]


def branch_witnesses(
    ns: NumericSystem,
    target_at: Callable[[float, float | None], float | None],
    radii: Sequence[float],
    cfg: OracleConfig,
    label: str,
    rel: float = 1e-4,
) -> list[np.ndarray | None]:
    """Tangency solutions following one branch across the certification radii.

    ``target_at(t, previous_value)`` returns the branch's value at radius t.
    Seeds are searched at the smallest radius (and a decade or two below if
    needed), then carried upward by predictor-corrector continuation.
    """
    rng = rng_for(cfg, f"witness:{label}")
    t0 = radii[0]
    seed = None
    seed_t = None
    for t_try in (t0, t0 / 10, t0 / 100):
        if t_try < 1:
            break
        v = target_at(t_try, None)
        if v is None or not math.isfinite(v):
            continue
        X = ns.sphere_starts(rng, t_try, max(cfg.starts, 16))
        X, ok = targeted_solve(ns, X, v, rel)
        seed = _best_row(ns, X, ok, v)
        if seed is not None:
            seed_t = t_try
            seed_v = v
            break
    out: list[np.ndarray | None] = [None] * len(radii)
    if seed is None:
        return out
    path = [(seed_t, seed, seed_v)]
    for k, t_goal in enumerate(radii):
        if path[-1][0] == t_goal:
            out[k] = path[-1][1]
            continue
        ok = _continue(ns, path, t_goal, target_at, rel)
        if not ok:
            break
        out[k] = path[-1][1]
    return out


def _predict(path, t_new, ns: NumericSystem) -> np.ndarray:
    t1, x1, _ = path[-1]
    if len(path) < 2:
        X = x1.copy()
        X[: ns.problem.nvars] *= t_new / t1
        return X
    t0, x0, _ = path[-2]
    r = math.log(t_new / t1) / math.log(t1 / t0)
    X = x1.copy()
    same = (np.sign(x0) == np.sign(x1)) & (x0 != 0) & (x1 != 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        logx = np.log(np.abs(x1)) + r * (np.log(np.abs(x1)) - np.log(np.abs(x0)))
    X[same] = np.sign(x1[same]) * np.exp(logx[same])
    X[~same] = x1[~same] + r * (x1[~same] - x0[~same])
    return X


def _continue(ns: NumericSystem, path, t_goal, target_at, rel) -> bool:
    t = path[-1][0]
    ratio = 1.25 if t_goal > t else 0.8
    attempts = 0
    while t != t_goal:
        attempts += 1
        if attempts > 400:
            return False
        t_next = t * ratio
        if (ratio > 1 and t_next > t_goal) or (ratio < 1 and t_next < t_goal):
            t_next = t_goal
        v = target_at(t_next, path[-1][2])
        if v is None or not math.isfinite(v):
            return False
        X = _predict(path, t_next, ns)[None, :]
        if ns.sys.t_idx is not None:
            X[:, ns.sys.t_idx] = t_next
        X, ok = targeted_solve(ns, X, v, rel)
        if ok[0]:
            path.append((t_next, X[0], v))
            t = t_next
            ratio = min(ratio * 1.5, 4.0) if ratio > 1 else max(ratio / 1.5, 0.25)
        else:
            ratio = math.sqrt(ratio)
            if abs(ratio - 1) < 1e-3:
                return False
    return True


def critical_witness(ns: NumericSystem, value: float, cfg: OracleConfig, label: str, rel: float = 1e-6):
    """A polished feasible critical point with objective ``value``, or None."""
    rng = rng_for(cfg, f"critical:{label}")
    X = ns.free_starts(rng, max(cfg.starts, 16))
    X, ok = targeted_solve(ns, X, value, rel)
    return _best_row(ns, X, ok, value)


def licq_smallest_singular(ns: NumericSystem, row: np.ndarray) -> float | None:
    """Smallest singular value of the active constraint gradients at a point."""
    p = ns.problem
    grads = list(p.equalities) + [p.inequalities[j] for j in ns.sys.active_set.active]
    if not grads:
        return None
    x = row[: p.nvars]
    M = np.array([[float(g.diff(k).eval_float(x)) for k in range(p.nvars)] for g in grads])
    scale = max(1.0, np.abs(M).max())
    return float(np.linalg.svd(M / scale, compute_uv=False).min()) if min(M.shape) else None


# -- sphere minimization ---------------------------------------------------------------

class SphereInfeasible(RuntimeError):
    """No feasible point was found on the sphere."""


@dataclass
class SphereSample:
    t: float
    psi: float
    minimizer: list[float]
    feasibility_residual: float
    agreement: int
    starts: int
    polished: bool = False
    active_set: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "psi": self.psi,
            "agreement": self.agreement,
            "starts": self.starts,
            "feasibility_residual": self.feasibility_residual,
            "polished": self.polished,
        }


class _Reduced:
    """The problem over its original coordinates only.

    Lifted coordinates are always set to their canonical value ``|e(x)|``, so
    the lifting constraints hold exactly and never trap a local solver at the
    kink ``z = e = 0``.  Gradients of lifted quantities follow the chain rule.
    """

    def __init__(self, problem: Problem):
        from .poly import parse_poly

        self.p = problem
        n, nb = problem.nvars, problem.n_base
        self.n, self.nb = n, nb
        self.lifts = []
        for k, rec in enumerate(problem.liftings):
            e = parse_poly(rec.expression, problem.vars)
            self.lifts.append((nb + k, CompiledSystem([e], n)))
        lift_eqs = [r.equality for r in problem.liftings]
        lift_ineqs = [r.inequality for r in problem.liftings]
        self.eq_polys = [g for g in problem.equalities if g not in lift_eqs]
        self.ineq_polys = [h for h in problem.inequalities if h not in lift_ineqs]
        self.f = CompiledSystem([problem.objective], n)
        self.g = CompiledSystem(self.eq_polys, n) if self.eq_polys else None
        self.h = CompiledSystem(self.ineq_polys, n) if self.ineq_polys else None

    def full(self, xb: np.ndarray):
        x = np.zeros(self.n)
        x[: self.nb] = xb
        D = np.zeros((self.n, self.nb))
        D[: self.nb, : self.nb] = np.eye(self.nb)
        for col, e in self.lifts:
            X = x[None]
            val = e.F(X)[0, 0]
            grad = e.jacobian(X)[0, 0]
            x[col] = abs(val)
            D[col] = np.sign(val) * (grad @ D)
        return x, D

    def lift(self, x: np.ndarray) -> np.ndarray:
        return self.full(np.asarray(x, dtype=float)[: self.nb])[0]

    def eval(self, sys: CompiledSystem, xb: np.ndarray):
        x, D = self.full(xb)
        X = x[None]
        return sys.F(X)[0], sys.jacobian(X)[0] @ D

    def violation(self, x: np.ndarray) -> float:
        """Largest scaled violation of the non-lifting constraints at a full point."""
        X = x[None]
        viol = 0.0
        if self.g is not None:
            F, S = self.g.residual(X)
            viol = max(viol, float(np.max(np.abs(F[0]) / S[0])))
        if self.h is not None:
            F, S = self.h.residual(X)
            viol = max(viol, float(np.max(np.maximum(-F[0], 0) / S[0])))
        return viol


class _SphereProblem:
    """Objective and constraints in the scaled coordinates xi = x_base / t."""

    def __init__(self, problem: Problem, t: float):
        self.p = problem
        self.t = t
        self.r = _Reduced(problem)
        self.gscale = np.array([max(1.0, t ** float(max(g.degree(), 0))) for g in self.r.eq_polys])
        self.hscale = np.array([max(1.0, t ** float(max(h.degree(), 0))) for h in self.r.ineq_polys])
        self.fscale = 1.0

    def fun(self, xi):
        F, J = self.r.eval(self.r.f, self.t * np.asarray(xi, dtype=float))
        val = F[0] / self.fscale
        grad = J[0] * self.t / self.fscale
        if not np.isfinite(val) or not np.all(np.isfinite(grad)):
            return 1e300, np.zeros_like(grad)
        return val, grad

    def constraints(self):
        cons = []

        def sphere(xi):
            return np.array([np.sum(np.asarray(xi) ** 2) - 1.0])

        def sphere_jac(xi):
            return 2 * np.asarray(xi)[None, :]

        cons.append({"type": "eq", "fun": sphere, "jac": sphere_jac})
        t, r = self.t, self.r
        if r.g is not None:
            gs = self.gscale
            cons.append(
                {
                    "type": "eq",
                    "fun": lambda xi: r.eval(r.g, t * np.asarray(xi))[0] / gs,
                    "jac": lambda xi: r.eval(r.g, t * np.asarray(xi))[1] * t / gs[:, None],
                }
            )
        if r.h is not None:
            hs = self.hscale
            cons.append(
                {
                    "type": "ineq",
                    "fun": lambda xi: r.eval(r.h, t * np.asarray(xi))[0] / hs,
                    "jac": lambda xi: r.eval(r.h, t * np.asarray(xi))[1] * t / hs[:, None],
                }
            )
        return cons

    def feasibility(self, x: np.ndarray) -> float:
        """Largest scaled violation at a full (lifted) point, sphere included."""
        nb = self.r.nb
        viol = abs(math.sqrt(float(np.sum(x[:nb] ** 2))) - self.t) / max(1.0, self.t)
        return max(viol, self.r.violation(x))

    def on_sphere(self, xb: np.ndarray) -> np.ndarray:
        nrm = np.linalg.norm(xb)
        return xb * (self.t / nrm) if nrm > 0 else xb


def _slsqp(sp: _SphereProblem, xi0: np.ndarray, cfg: OracleConfig):
    cons = sp.constraints()
    best = xi0
    for stage in range(2):
        val0 = abs(sp.r.eval(sp.r.f, sp.t * best)[0][0])
        scale = 1.0 + (val0 if np.isfinite(val0) else 1.0)
        if stage and scale * 10 > sp.fscale:
            # the first pass already worked at the right scale
            break
        sp.fscale = scale
        try:
            with np.errstate(all="ignore"):
                res = minimize(
                    sp.fun,
                    best,
                    jac=True,
                    method="SLSQP",
                    constraints=cons,
                    options={"maxiter": cfg.max_iters if stage == 0 else min(cfg.max_iters, 100), "ftol": 1e-10},
                )
        except (ValueError, FloatingPointError, np.linalg.LinAlgError):
            break
        if not np.all(np.isfinite(res.x)):
            break
        best = res.x
    sp.fscale = 1.0
    return best


def _lift_exact(problem: Problem, x: np.ndarray) -> np.ndarray:
    return _Reduced(problem).lift(x)


def _polish_on_sphere(problem: Problem, x: np.ndarray, t: float):
    """Newton polish on the KKT tangency system of the detected active set."""
    m = len(problem.inequalities)
    active = []
    for j, h in enumerate(problem.inequalities):
        val = h.eval_float(x)
        sc = 1 + sum(abs(float(c)) * abs(float(np.prod(x ** np.array(mm)))) for mm, c in h.terms.items())
        if val <= 1e-6 * sc:
            active.append(j)
    J = ActiveSet(tuple(active), m)
    ns = numeric_system(problem, J, tangency=True)
    X = np.zeros((1, ns.ncols))
    X[0, : problem.nvars] = x
    X[0, ns.sys.t_idx] = t
    ns.fit_multipliers(X)
    X, nrm = ns.polish(X, iters=40)
    if nrm[0] <= RESIDUAL_TOL and ns.sign_ok(X)[0]:
        return X[0, : problem.nvars], tuple(active)
    return None, tuple(active)


def sample_psi(
    problem: Problem,
    t: float,
    cfg: OracleConfig,
    warm: Sequence[np.ndarray] = (),
) -> SphereSample:
    """Multi-start estimate of min f over the feasible points at radius ``t``."""
    if t <= 0:
        raise ValueError("radius must be positive")
    rng = rng_for(cfg, f"psi:{t!r}")
    sp = _SphereProblem(problem, t)
    r = sp.r
    nb = r.nb
    starts = [sp.on_sphere(np.asarray(w, dtype=float)[:nb]) for w in warm]
    for _ in range(cfg.starts):
        d = rng.standard_normal(nb)
        starts.append(sp.on_sphere(d))
    results = []
    for xb0 in starts:
        xb = sp.on_sphere(t * _slsqp(sp, xb0 / t, cfg))
        x = r.lift(xb)
        val = exact_value(problem.objective, x)
        is_polished = False
        active: tuple[int, ...] = ()
        polished, active = _polish_on_sphere(problem, x, t)
        if polished is not None:
            xp = r.lift(sp.on_sphere(polished[:nb]))
            vp = exact_value(problem.objective, xp)
            if sp.feasibility(xp) <= cfg.tol_feas * (1 + t) and vp <= val + 1e-9 * (1 + abs(val)):
                x, val, is_polished = xp, vp, True
        viol = sp.feasibility(x)
        if viol > cfg.tol_feas * (1 + t) or not math.isfinite(val):
            continue
        results.append((val, tuple(x.tolist()), viol, is_polished, active))
    if not results:
        raise SphereInfeasible(f"no feasible point found on the sphere of radius {t:g}")
    results.sort(key=lambda q: (q[0], q[1]))
    best = results[0]
    agree = sum(1 for q in results if abs(q[0] - best[0]) <= 1e-6 * max(1.0, abs(best[0])))
    return SphereSample(t, best[0], list(best[1]), best[2], agree, len(starts), best[3], best[4])


def psi_grid(problem: Problem, radii: Sequence[float], cfg: OracleConfig) -> list[SphereSample | None]:
    """One sample per radius; each radius is warm-started from the previous minimizer."""
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing")
    out: list[SphereSample | None] = []
    warm: list[np.ndarray] = []
    for t in radii:
        try:
            s = sample_psi(problem, t, cfg, warm)
        except SphereInfeasible:
            out.append(None)
            warm = []
            continue
        out.append(s)
        warm = [np.array(s.minimizer)]
    return out


@np.errstate(all="ignore")
def sphere_feasible_point(problem: Problem, t: float, cfg: OracleConfig) -> list[float] | None:
    """Any feasible point at radius ``t`` (penalty descent on the sphere), or None."""
    sp = _SphereProblem(problem, t)
    r = sp.r
    if r.g is None and r.h is None:
        xb = np.zeros(r.nb)
        xb[0] = t
        return r.lift(xb).tolist()
    rng = rng_for(cfg, f"feasible:{t!r}")

    def penalty(xi, weight):
        xb = t * np.asarray(xi)
        val = 0.0
        grad = np.zeros_like(xi)
        if r.g is not None:
            G, JG = r.eval(r.g, xb)
            G, JG = G / sp.gscale, JG * t / sp.gscale[:, None]
            val += float(G @ G)
            grad += 2 * JG.T @ G
        if r.h is not None:
            H, JH = r.eval(r.h, xb)
            H, JH = np.minimum(H / sp.hscale, 0.0), JH * t / sp.hscale[:, None]
            val += float(H @ H)
            grad += 2 * JH.T @ H
        return weight * val, weight * grad

    sphere_con = sp.constraints()[:1]
    for _ in range(max(8, cfg.starts // 4)):
        d = rng.standard_normal(r.nb)
        xi = d / np.linalg.norm(d)
        weight = cfg.penalty_weight
        for _round in range(cfg.penalty_rounds):
            try:
                res = minimize(
                    penalty, xi, args=(weight,), jac=True, method="SLSQP",
                    constraints=sphere_con, options={"maxiter": cfg.max_iters, "ftol": 1e-16},
                )
                xi = res.x
            except (ValueError, np.linalg.LinAlgError):
                break
            weight *= cfg.penalty_ratio
        x = r.lift(sp.on_sphere(t * xi))
        if sp.feasibility(x) <= 1e-7:
            return x.tolist()
        # a full minimization also serves as a feasibility probe
        x2 = r.lift(sp.on_sphere(t * _slsqp(sp, x[: r.nb] / t, cfg)))
        if sp.feasibility(x2) <= 1e-7:
            return x2.tolist()
    return None


@np.errstate(all="ignore")
def minimize_global(problem: Problem, cfg: OracleConfig, scales=(1.0, 10.0, 100.0)) -> tuple[float, list[float]] | None:
    """Multi-start SLSQP over the whole feasible set (no sphere)."""
    rng = rng_for(cfg, "global")
    r = _Reduced(problem)
    cons = []
    if r.g is not None:
        cons.append({"type": "eq", "fun": lambda x: r.eval(r.g, x)[0], "jac": lambda x: r.eval(r.g, x)[1]})
    if r.h is not None:
        cons.append({"type": "ineq", "fun": lambda x: r.eval(r.h, x)[0], "jac": lambda x: r.eval(r.h, x)[1]})

    def fun(x):
        F, J = r.eval(r.f, x)
        return F[0], J[0]

    best = None
    for k in range(cfg.starts):
        x0 = rng.standard_normal(r.nb) * scales[k % len(scales)]
        try:
            res = minimize(fun, x0, jac=True, method="SLSQP", constraints=cons,
                           options={"maxiter": cfg.max_iters, "ftol": 1e-15})
        except (ValueError, np.linalg.LinAlgError):
            continue
        if not np.all(np.isfinite(res.x)):
            continue
        x = r.lift(res.x)
        if r.violation(x) > 1e-9:
            continue
        val = exact_value(problem.objective, x)
        if best is None or (val, tuple(x)) < (best[0], tuple(best[1])):
            best = (val, x.tolist())
    return best
