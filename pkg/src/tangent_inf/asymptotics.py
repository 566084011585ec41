"""Branches of the tangency curve at infinity, their limits, and their certification.

Exact expansion lives in :mod:`puiseux`; this module turns raw branches into
``PuiseuxBranch`` records, reads off the limit of f along each branch, and
checks every branch against floating-point evidence before it is allowed to
influence a verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .algebraic import ExtendedReal, RealAlgebraic, poly_str
from .elimination import CriticalValuePoly, PlaneCurve
from .oracle import (
    NumericSystem,
    OracleConfig,
    branch_witnesses,
    critical_witness,
    licq_smallest_singular,
    numeric_system,
)
from .poly import MultiPoly
from .puiseux import DEFAULT_DEPTH, RawBranch, newton_polygon_branches
from .systems import ActiveSet

DEFAULT_RADII = (1e2, 1e3, 1e4)
MAX_RADIUS = 1e6
POLISH_RESIDUAL = 1e-8
WITNESS_REL = 1e-4
CONSTANT_REL = 1e-10
LICQ_THRESHOLD = 1e-8


class InconsistencyError(RuntimeError):
    """Symbolic and numeric evidence disagree."""


def validate_radii(radii: Sequence[float]) -> list[float]:
    radii = [float(r) for r in radii]
    if len(radii) < 3:
        raise ValueError("certification needs at least 3 radii")
    if any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and increasing")
    if radii[-1] < 100 * radii[0]:
        raise ValueError("radii must span at least two decades")
    return radii


def branch_limit(raw: RawBranch) -> ExtendedReal:
    """Limit of the branch value as the radius grows."""
    if not raw.is_real or raw.leading is None:
        raise ValueError("non-real branch has no limit on the real curve")
    g = raw.gamma
    if g < 0:
        return ExtendedReal.pos_inf() if raw.leading.sign() > 0 else ExtendedReal.neg_inf()
    if g == 0:
        return ExtendedReal.finite(raw.leading)
    return ExtendedReal.finite(0)


def _fraction_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass
class PuiseuxBranch:
    raw: RawBranch
    active_set: ActiveSet
    certified_real: bool = False
    certified_feasible: bool = False
    reality_undecided: bool = False
    predictions: list[tuple[float, float]] = field(default_factory=list)
    witnesses: list[dict] = field(default_factory=list)
    witness_constant: bool | None = None
    monotone: bool | None = None
    notes: list[str] = field(default_factory=list)
    included: bool | None = None

    @property
    def alpha(self) -> Fraction:
        return self.raw.alpha

    @property
    def leading_coeff(self) -> RealAlgebraic | None:
        return self.raw.leading

    @property
    def is_real(self) -> bool:
        return self.raw.is_real

    @property
    def limit(self) -> ExtendedReal | None:
        return branch_limit(self.raw) if self.raw.is_real else None

    @property
    def is_constant(self) -> bool:
        """Exactly constant expansion, confirmed by witness values when available."""
        if not self.raw.is_constant:
            return False
        return self.witness_constant is not False

    @property
    def counts(self) -> bool:
        """Whether the branch enters the verdicts."""
        if self.included is not None:
            return self.included
        return self.certified_feasible

    def prediction_at(self, t: float) -> float | None:
        for r, v in self.predictions:
            if r == t:
                return v
        return None

    def series_str(self) -> str:
        if not self.raw.is_real:
            z = self.raw.complex_leading
            return f"({z.real:.6g}{z.imag:+.6g}i)*t^{_fraction_str(self.alpha)} + ..."
        return self.raw.describe()

    def to_json(self) -> dict:
        d = {
            "active_set": self.active_set.label(),
            "curve_factor": self.raw.factor.to_str(["u", "v"]),
            "alpha": _fraction_str(self.alpha),
            "is_real": self.raw.is_real,
            "series": self.series_str(),
            "certified_real": self.certified_real,
            "certified_feasible": self.certified_feasible,
            "reality_undecided": self.reality_undecided,
            "counted": self.counts,
            "is_constant": self.is_constant if self.raw.is_real else False,
            "depth_limited": self.raw.depth_limited,
            "witness_radius": max((w["t"] for w in self.witnesses), default=None),
            "witnesses": self.witnesses,
            "monotone_tail": self.monotone,
            "notes": list(self.raw.notes) + self.notes,
        }
        if self.raw.is_real:
            d["leading_coeff"] = self.raw.leading.to_json()
            d["lambda"] = self.limit.to_json()
        else:
            d["leading_coeff"] = None
            d["lambda"] = None
        return d


@dataclass
class BranchSet:
    branches: list[PuiseuxBranch]
    curves: dict[str, str]
    radii: list[float]

    @property
    def effective_radius(self) -> float:
        return self.radii[0]

    def certified(self) -> list[PuiseuxBranch]:
        return [b for b in self.branches if b.counts]

    def undecided(self) -> list[PuiseuxBranch]:
        return [b for b in self.branches if b.reality_undecided and not b.counts]


# -- root polishing against the curve -----------------------------------------------

def _curve_in_v(factor, u):
    """Coefficients (constant first) of P(u, v) as a polynomial in v at fixed u."""
    deg = max(m[1] for m in factor.terms)
    cs = [mpmath.mpf(0)] * (deg + 1)
    for m, c in factor.terms.items():
        cs[m[1]] += mpmath.mpf(int(c.numerator)) / int(c.denominator) * u ** m[0]
    return cs


def polish_on_curve(factor, t: float, guess, dps: int = 50, iters: int = 80):
    """Newton's method for a root of P(t^2, v) near ``guess``.

    Returns (value, relative residual), or None if the iteration diverged.
    Clustered roots converge slowly, so acceptance is left to the residual.
    """
    with mpmath.workdps(dps):
        u = mpmath.mpf(t) ** 2
        cs = _curve_in_v(factor, u)
        ds = [k * c for k, c in enumerate(cs)][1:]
        v = mpmath.mpf(guess)

        def horner(coeffs, x):
            acc = mpmath.mpf(0)
            for c in reversed(coeffs):
                acc = acc * x + c
            return acc

        for _ in range(iters):
            fv = horner(cs, v)
            dv = horner(ds, v) if ds else mpmath.mpf(0)
            if dv == 0:
                break
            step = fv / dv
            v -= step
            if abs(step) <= mpmath.mpf(10) ** (-dps + 10) * (1 + abs(v)):
                break
        if not mpmath.isfinite(v):
            return None
        scale = sum(abs(c) * abs(v) ** k for k, c in enumerate(cs))
        res = abs(horner(cs, v)) / scale if scale else abs(horner(cs, v))
        return float(v), float(res)


def branch_value_at(branch: PuiseuxBranch | RawBranch, t: float, guess: float | None = None):
    raw = branch.raw if isinstance(branch, PuiseuxBranch) else branch
    pred = float(raw.value(t, 30)) if guess is None else guess
    out = polish_on_curve(raw.factor, t, pred)
    if out is None:
        return None
    v, res = out
    if res > POLISH_RESIDUAL or not math.isfinite(v):
        return None
    if guess is None and abs(v - pred) > 0.1 * abs(pred) + 1e-12 * (1 + t):
        return None
    return v


# -- certification ---------------------------------------------------------------------

def certify_branches(
    raws: Sequence[RawBranch],
    problem,
    active_set: ActiveSet,
    radii: Sequence[float],
    cfg: OracleConfig,
) -> list[PuiseuxBranch]:
    """Wrap the raw branches of one tangency curve and check each numerically."""
    radii = validate_radii(radii)
    ns = numeric_system(problem, active_set, tangency=True)
    out = []
    for k, raw in enumerate(raws):
        br = PuiseuxBranch(raw, active_set)
        out.append(br)
        if not raw.is_real:
            br.notes.append("leading coefficient is not real")
            continue
        preds = []
        for t in radii:
            preds.append((t, branch_value_at(raw, t)))
        if any(v is None for _, v in preds):
            br.reality_undecided = True
            br.notes.append("Newton polish against the curve failed at some radius")
            continue
        br.certified_real = True
        br.predictions = [(t, float(v)) for t, v in preds]
        label = f"{active_set.label()}:{k}"
        if raw.multiplicity > 1 and not raw.terminated:
            _certify_cluster(br, ns, radii, cfg, label)
        else:
            _attach_witnesses(br, ns, radii, cfg, label)
    return out


def cluster_roots(raw: RawBranch, t: float, dps: int = 50) -> list[float] | None:
    """Real members of a cluster of branches sharing the truncated series, sorted.

    The cluster is the ``raw.multiplicity`` roots of P(t^2, v) closest to the
    truncated prediction; non-real members are dropped.
    """
    with mpmath.workdps(dps):
        cs = _curve_in_v(raw.factor, mpmath.mpf(t) ** 2)
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if len(cs) < 2:
            return None
        try:
            roots = mpmath.polyroots(list(reversed(cs)), maxsteps=200, extraprec=4 * dps)
        except mpmath.libmp.NoConvergence:
            return None
        pred = raw.value(t, dps)
        near = sorted(roots, key=lambda z: abs(z - pred))[: raw.multiplicity]
        real = [float(mpmath.re(z)) for z in near if abs(mpmath.im(z)) <= mpmath.mpf(10) ** (-dps // 2) * (1 + abs(z))]
    return sorted(real)


def _certify_cluster(br: PuiseuxBranch, ns: NumericSystem, radii, cfg, label) -> None:
    """Certify a depth-limited branch that stands for several nearby curve branches.

    Distinct branches at infinity stop crossing for large radii, so a member
    is followed by its rank in the sorted cluster.  The lowest member that
    certifies is kept.
    """
    members = {t: cluster_roots(br.raw, t) for t in radii}
    counts = {len(m) for m in members.values() if m is not None}
    if None in members.values() or len(counts) != 1 or not counts.pop():
        _attach_witnesses(br, ns, radii, cfg, label)
        return
    n = len(members[radii[0]])
    best = None
    for i in range(n):
        trial = PuiseuxBranch(br.raw, br.active_set, certified_real=True)
        trial.predictions = [(t, members[t][i]) for t in radii]

        def value_at(t, i=i):
            roots = cluster_roots(br.raw, t)
            return roots[i] if roots is not None and len(roots) == n else None

        _attach_witnesses(trial, ns, radii, cfg, f"{label}:{i}", value_at)
        if trial.certified_feasible and (best is None or trial.predictions[-1][1] < best.predictions[-1][1]):
            best = trial
    br.notes.append(f"stands for {n} real curve branches that agree to the computed depth")
    if best is None:
        br.notes.append("no feasible tangency point found along any member")
        return
    for name in ("certified_feasible", "predictions", "witnesses", "witness_constant", "monotone"):
        setattr(br, name, getattr(best, name))
    br.notes.extend(best.notes)


def _attach_witnesses(br: PuiseuxBranch, ns: NumericSystem, radii, cfg, label, value_at=None) -> None:
    cache: dict[float, float | None] = dict(br.predictions)

    def target_at(t, previous):
        if t in cache:
            return cache[t]
        if value_at is not None:
            v = value_at(t)
        else:
            v = branch_value_at(br.raw, t)
            if v is None and previous is not None:
                v = branch_value_at(br.raw, t, guess=previous)
        cache[t] = v
        return v

    rows = branch_witnesses(ns, target_at, radii, cfg, label, rel=WITNESS_REL)
    if any(r is None for r in rows):
        br.notes.append("no feasible tangency point found along this branch")
        return
    br.certified_feasible = True
    sysd = ns.sys
    vals = []
    mus = []
    for t, row in zip(radii, rows):
        val = float(ns.values(row[None])[0])
        vals.append(val)
        mu = float(row[sysd.mu_idx])
        mus.append(mu)
        br.witnesses.append(
            {
                "t": t,
                "value": val,
                "point": [float(x) for x in row[: sysd.n_x]],
                "mu": mu,
            }
        )
        sv = licq_smallest_singular(ns, row)
        if sv is not None and sv < LICQ_THRESHOLD:
            note = "active constraint gradients nearly dependent at a witness (LICQ spot check)"
            if note not in br.notes:
                br.notes.append(note)
    br.witness_constant = all(abs(v - vals[0]) <= CONSTANT_REL * max(1.0, abs(vals[0])) for v in vals)
    diffs = np.diff(vals)
    tol = 1e-6 * max(1.0, max(abs(v) for v in vals))
    br.monotone = bool(np.all(diffs >= -tol) or np.all(diffs <= tol))
    small_mu = []
    for w in br.witnesses:
        x = np.array(w["point"])
        radial = abs(w["mu"]) * float(np.linalg.norm(x[list(ns.problem.sphere_vars)]))
        # compare against the size of the gradient's terms, which is what float noise scales with
        ax = np.abs(x)
        grad = 0.0
        for k in range(len(x)):
            d = ns.problem.objective.diff(k)
            grad += MultiPoly(d.nvars, {m: abs(c) for m, c in d.terms.items()}).eval_float(ax) ** 2
        small_mu.append(radial <= 1e-14 * (1 + math.sqrt(grad)))
    if br.raw.is_constant and not all(small_mu):
        br.notes.append("constant branch with witnesses off the critical locus (mu not ~ 0)")
    if any(small_mu) and not all(small_mu):
        br.notes.append("witnesses show mixed mu ~ 0 and mu != 0 behaviour")


def expand_curve(curve: PlaneCurve, depth: int = DEFAULT_DEPTH) -> list[RawBranch]:
    return newton_polygon_branches(curve.factors, depth)


# -- critical values -------------------------------------------------------------------

@dataclass
class CertifiedCriticalValue:
    value: RealAlgebraic
    active_set: ActiveSet
    certified: bool
    witness: list[float] | None = None
    notes: list[str] = field(default_factory=list)
    included: bool | None = None

    @property
    def counts(self) -> bool:
        return self.certified if self.included is None else self.included

    def to_json(self) -> dict:
        return {
            "active_set": self.active_set.label(),
            "value": self.value.to_json(),
            "certified": self.certified,
            "counted": self.counts,
            "witness": self.witness,
            "notes": self.notes,
        }


def certify_critical_values(
    cvp: CriticalValuePoly, problem, active_set: ActiveSet, cfg: OracleConfig
) -> list[CertifiedCriticalValue]:
    """Keep the roots of q that have a real feasible critical point behind them."""
    ns = numeric_system(problem, active_set, tangency=False)
    out = []
    for k, r in enumerate(cvp.roots):
        row = critical_witness(ns, float(r), cfg, f"{active_set.label()}:{k}")
        cv = CertifiedCriticalValue(r, active_set, row is not None)
        if row is not None:
            cv.witness = [float(x) for x in row[: ns.sys.n_x]]
            sv = licq_smallest_singular(ns, row)
            if sv is not None and sv < LICQ_THRESHOLD:
                cv.notes.append("active constraint gradients nearly dependent at the witness (LICQ spot check)")
        else:
            cv.notes.append("no real feasible critical point with this value")
        out.append(cv)
    return out


# -- numeric fallback --------------------------------------------------------------------

@dataclass
class LeadingFit:
    alpha: float
    a: float
    r2: float
    flagged: bool
    samples_used: int

    @property
    def limit_estimate(self) -> float:
        if self.a == 0:
            return 0.0
        if self.alpha > 0.1:
            return math.copysign(math.inf, self.a)
        if self.alpha < -0.1:
            return 0.0
        return self.a


def fit_leading_term(samples: Sequence[tuple[float, float]], zero_tol: float = 1e-12) -> LeadingFit:
    """Least-squares fit of psi(t) ~ a t^alpha on log-log axes."""
    pts = [(float(t), float(v)) for t, v in samples]
    if len(pts) < 2 or any(not math.isfinite(v) or t <= 0 for t, v in pts):
        raise ValueError("need at least two finite samples at positive radii")
    if all(abs(v) <= zero_tol * (1 + t) for t, v in pts):
        return LeadingFit(0.0, 0.0, 1.0, False, len(pts))
    signs = [0 if abs(v) <= zero_tol * (1 + t) else (1 if v > 0 else -1) for t, v in pts]
    flagged = False
    tail = len(pts)
    last = next(s for s in reversed(signs) if s)
    k = len(pts)
    while k > 0 and signs[k - 1] == last:
        k -= 1
    if k > 0:
        flagged = True
        pts = pts[k:]
        tail = len(pts)
    if len(pts) == 1:
        return LeadingFit(0.0, pts[0][1], 0.0, True, 1)
    x = np.log([t for t, _ in pts])
    y = np.log([abs(v) for _, v in pts])
    A = np.vstack([x, np.ones_like(x)]).T
    (alpha, loga), *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ np.array([alpha, loga])
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return LeadingFit(float(alpha), last * float(math.exp(loga)), r2, flagged, tail)


def q_description(cvp: CriticalValuePoly) -> str:
    return poly_str(cvp.q, "v")
