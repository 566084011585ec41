"""End-to-end orchestration: load, analyze, decide, report."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import __version__
from .algebraic import ExtendedReal, RealAlgebraic
from .asymptotics import (
    DEFAULT_RADII,
    MAX_RADIUS,
    BranchSet,
    CertifiedCriticalValue,
    InconsistencyError,
    PuiseuxBranch,
    certify_branches,
    certify_critical_values,
    expand_curve,
    fit_leading_term,
    validate_radii,
)
from .elimination import (
    NonGenericSystem,
    PositiveDimensionalCriticalValues,
    eliminate_to_critical_values,
    eliminate_to_plane_curve,
)
from .groebner import DEFAULT_BUDGET, EliminationBudgetExceeded
from .oracle import OracleConfig, minimize_global, psi_grid
from .poly import PolyParseError
from .problem import Problem, ProblemError, check_unbounded_domain, load_problem
from .puiseux import DEFAULT_DEPTH, MAX_DEPTH
from .systems import ActiveSetCapExceeded, build_critical_system, build_tangency_system, enumerate_active_sets
from .verdict import (
    NOT_APPLICABLE,
    YES,
    NO,
    CriticalSummary,
    Justification,
    LatticeViolation,
    TieUnresolved,
    Verdict,
    decide_all,
    heuristic_verdict,
)

MODES = ("symbolic", "numeric", "hybrid")
EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_INCONSISTENT = 0, 1, 2, 3
AGREEMENT_WARNING = 0.25
PSI_CONSISTENCY = 1e-3
LIMIT_CONSISTENCY = 1e-2


class PipelineError(RuntimeError):
    """A failure that stops the run, tagged with the module that raised it."""

    def __init__(self, module: str, message: str, hint: str, exit_code: int):
        self.module, self.hint, self.exit_code = module, hint, exit_code
        super().__init__(f"[{module}] {message} (hint: {hint})")


@dataclass
class RunConfig:
    input: str | None = None
    problem: Problem | None = None
    mode: str = "hybrid"
    radii: Sequence[float] = DEFAULT_RADII
    oracle: OracleConfig = field(default_factory=OracleConfig)
    gb_budget: int = DEFAULT_BUDGET
    elimination: str = "auto"
    depth: int = DEFAULT_DEPTH
    json_path: str | None = None
    psi_csv: str | None = None
    verbose: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")
        if self.elimination not in ("auto", "groebner", "resultant"):
            raise ValueError("elimination must be auto, groebner or resultant")
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must be between 1 and {MAX_DEPTH}")
        if self.gb_budget < 1:
            raise ValueError("gb_budget must be positive")
        if (self.input is None) == (self.problem is None):
            raise ValueError("give exactly one of input path or problem")
        self.radii = validate_radii(self.radii)


@dataclass
class Report:
    data: dict
    verdict: Verdict
    psi_samples: list
    exit_code: int = EXIT_OK

    def without_timing(self) -> dict:
        d = dict(self.data)
        d["meta"] = {k: v for k, v in d["meta"].items() if k != "timing"}
        return d


def _load(cfg: RunConfig) -> Problem:
    if cfg.problem is not None:
        return cfg.problem
    try:
        return load_problem(cfg.input)
    except PolyParseError as exc:
        raise PipelineError("poly-core", str(exc), "check the expression syntax", EXIT_INPUT) from exc
    except ProblemError as exc:
        raise PipelineError("problem-model", str(exc), "fix the problem file", EXIT_INPUT) from exc
    except OSError as exc:
        raise PipelineError("problem-model", f"cannot read {cfg.input}: {exc}", "check the path", EXIT_INPUT) from exc


def _psi_json(samples, radii) -> list[dict]:
    out = []
    for t, s in zip(radii, samples):
        if s is None:
            out.append({"t": t, "psi": None, "agreement": 0, "starts": 0, "feasibility_residual": None, "polished": False})
        else:
            out.append(s.to_dict())
    return out


def _agreement_caveats(samples) -> list[str]:
    out = []
    for s in samples:
        if s is not None and s.agreement < AGREEMENT_WARNING * s.starts:
            out.append(
                f"possibly missed global sphere minimum at t={s.t:g} "
                f"({s.agreement} of {s.starts} starts agree)"
            )
    return out


def _elimination_force(cfg: RunConfig):
    return None if cfg.elimination == "auto" else cfg.elimination


def _eliminate(fn, sys, cfg: RunConfig, label: str):
    try:
        return fn(sys, budget=cfg.gb_budget, force=_elimination_force(cfg))
    except EliminationBudgetExceeded as exc:
        raise PipelineError("elimination", f"active set {label}: {exc}", "use resultant elimination or raise --gb-budget", EXIT_BUDGET) from exc
    except (NonGenericSystem, PositiveDimensionalCriticalValues) as exc:
        raise PipelineError("elimination", str(exc), "perturb the problem or check the regularity assumption", EXIT_INPUT) from exc


def run(cfg: RunConfig) -> Report:
    """Run the configured analysis and return the report (exit code inside)."""
    t0 = time.perf_counter()
    problem = _load(cfg)
    timing: dict[str, float] = {}
    caveats: list[str] = []
    if not problem.regular:
        caveats.append("regularity is not asserted; the branch and critical-value analysis may be incomplete")
    if problem.liftings:
        caveats.append(
            "absolute values were lifted to smooth constraints; the lifted problem is what was analyzed"
        )
    meta = {
        "tool": "tangent-inf",
        "version": __version__,
        "mode": cfg.mode,
        "seed": cfg.oracle.seed,
        "starts": cfg.oracle.starts,
        "radii": list(cfg.radii),
        "depth": cfg.depth,
        "gb_budget": cfg.gb_budget,
    }
    if cfg.mode == "numeric":
        verdict, extra = _run_numeric(problem, cfg, caveats)
    else:
        verdict, extra = _run_exact(problem, cfg, caveats, timing)
    caveats.extend(verdict.caveats)
    meta.update(extra.pop("meta", {}))
    timing["total_seconds"] = time.perf_counter() - t0
    meta["timing"] = timing
    data = {
        "problem": problem.to_dict(),
        "verdicts": verdict.to_json(),
        "branches": extra.get("branches", []),
        "critical_values": extra.get("critical_values", []),
        "psi_samples": extra.get("psi_samples", []),
        "caveats": _unique(caveats),
        "justifications": [j.to_json() for j in verdict.justification],
        "meta": meta,
    }
    return Report(data, verdict, extra.get("samples", []))


def _unique(items):
    seen, out = set(), []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


# -- symbolic / hybrid ----------------------------------------------------------------

def _run_exact(problem: Problem, cfg: RunConfig, caveats: list[str], timing: dict):
    hybrid = cfg.mode == "hybrid"
    radii = list(cfg.radii)
    meta: dict = {}
    if hybrid:
        start = time.perf_counter()
        unbounded, info = check_unbounded_domain(problem, radii, cfg.oracle)
        timing["domain_check_seconds"] = time.perf_counter() - start
        if not unbounded:
            return _run_bounded(problem, cfg, caveats, info)
    else:
        caveats.append("symbolic mode: the feasible set is assumed unbounded and nothing is checked numerically")
    if problem.is_constant_objective():
        return _run_constant(problem, caveats)
    try:
        active_sets = enumerate_active_sets(problem)
    except ActiveSetCapExceeded as exc:
        raise PipelineError("systems", str(exc), "drop redundant inequalities", EXIT_INPUT) from exc

    start = time.perf_counter()
    per_set = []
    crit_polys = {}
    curves = {}
    elim_stats = {}
    for J in active_sets:
        label = J.label()
        curve = _eliminate(eliminate_to_plane_curve, build_tangency_system(problem, J), cfg, label)
        cvp = _eliminate(eliminate_to_critical_values, build_critical_system(problem, J, with_value=True), cfg, label)
        curves[label] = curve.to_str()
        crit_polys[label] = cvp.to_str()
        elim_stats[label] = {"curve": curve.stats.to_dict(), "critical": cvp.stats.to_dict()}
        per_set.append((J, curve, cvp))
    timing["elimination_seconds"] = time.perf_counter() - start

    start = time.perf_counter()
    raw_sets = [(J, expand_curve(curve, cfg.depth), cvp) for J, curve, cvp in per_set]
    timing["expansion_seconds"] = time.perf_counter() - start

    start = time.perf_counter()
    crit: list[CertifiedCriticalValue] = []
    branches: list[PuiseuxBranch] = []
    unchecked: list[str] = []
    samples = []
    if hybrid:
        for J, _, cvp in raw_sets:
            crit.extend(certify_critical_values(cvp, problem, J, cfg.oracle))
        while True:
            branches = []
            for J, raws, _ in raw_sets:
                branches.extend(certify_branches(raws, problem, J, radii, cfg.oracle))
            if any(b.counts for b in branches):
                break
            if radii[-1] * 10 > MAX_RADIUS:
                raise PipelineError(
                    "asymptotics",
                    "no tangency branch certifies although the feasible set is unbounded",
                    "rerun with --mode numeric to inspect the sphere minima",
                    EXIT_INCONSISTENT,
                )
            radii = [r * 10 for r in radii]
            caveats.append(f"certification radii escalated to {', '.join(f'{r:g}' for r in radii)}")
        samples = psi_grid(problem, radii, cfg.oracle)
        caveats.extend(_agreement_caveats(samples))
    else:
        for J, raws, cvp in raw_sets:
            signed = bool(build_tangency_system(problem, J).sign_conditions)
            note = "sign conditions not checked" if signed else "no sign conditions on this active set"
            for r in cvp.roots:
                cv = CertifiedCriticalValue(r, J, False, notes=[note], included=True)
                crit.append(cv)
                if signed:
                    unchecked.append(f"critical value {r.describe()} on {J.label()}")
            for raw in raws:
                b = PuiseuxBranch(raw, J, included=raw.is_real)
                if raw.is_real:
                    b.notes.append(note)
                    if signed:
                        unchecked.append(f"{J.label()}:{b.series_str()}")
                branches.append(b)
    timing["certification_seconds"] = time.perf_counter() - start

    bs = BranchSet(branches, curves, radii)
    counted = bs.certified()
    cs = CriticalSummary(crit)
    try:
        verdict = decide_all(counted, cs, bs.undecided() if hybrid else ())
    except TieUnresolved as exc:
        raise PipelineError("verdict", str(exc), "rerun with a larger expansion depth", EXIT_INCONSISTENT) from exc
    except LatticeViolation as exc:
        raise PipelineError("verdict", f"verdict lattice violated: {exc}", "report this input", EXIT_INCONSISTENT) from exc

    if hybrid:
        meta["consistency"] = _consistency(counted, samples, radii, verdict, caveats, bs.undecided())
        caveats.append(
            f"branch certification is numeric evidence at radii {', '.join(f'{r:g}' for r in radii)}; "
            f"behaviour beyond the largest radius is not proved"
        )
        for b in counted:
            for note in b.notes:
                if "LICQ" in note or "mixed" in note or "off the critical locus" in note:
                    caveats.append(f"branch {b.active_set.label()} {b.series_str()}: {note}")
        for cv in cs.counted:
            for note in cv.notes:
                caveats.append(f"critical value {cv.value.describe()} on {cv.active_set.label()}: {note}")
    if not hybrid and unchecked:
        # the relaxed variety ignores signs; verdicts hold for it, not necessarily for the problem
        for key in verdict.status:
            verdict.status[key] = "conditional"
            verdict.conditional_on[key] = list(unchecked)
        caveats.append(
            "symbolic mode analyzed the tangency variety without its sign conditions; "
            "every verdict is conditional on the listed branches and critical values being feasible"
        )

    meta.update(
        {
            "effective_radius": radii[0],
            "certification_radii": radii,
            "curves": curves,
            "critical_value_polynomials": crit_polys,
            "elimination": elim_stats,
        }
    )
    return verdict, {
        "branches": [b.to_json() for b in branches],
        "critical_values": [c.to_json() for c in crit],
        "psi_samples": _psi_json(samples, radii) if hybrid else [],
        "samples": samples,
        "meta": meta,
    }


def _consistency(counted, samples, radii, verdict: Verdict, caveats: list[str], undecided=()) -> dict:
    """Branch predictions against the sampled sphere minima."""
    rows = []
    for t, s in zip(radii, samples):
        preds = [b.prediction_at(t) for b in counted]
        preds = [p for p in preds if p is not None]
        if s is None or not preds:
            rows.append({"t": t, "branch_min": min(preds) if preds else None, "psi": None, "ok": None})
            continue
        lo = min(preds)
        ok = abs(lo - s.psi) <= PSI_CONSISTENCY * (1 + abs(s.psi))
        rows.append({"t": t, "branch_min": lo, "psi": s.psi, "ok": ok})
        if not ok and s.psi < lo and not undecided:
            # a feasible sphere point beats every certified branch, so a branch is missing
            raise PipelineError(
                "asymptotics",
                f"at t={t:g} the sampled sphere minimum {s.psi:.10g} lies below every certified branch "
                f"(least prediction {lo:.10g})",
                "rerun with a larger --depth or --elimination resultant",
                EXIT_INCONSISTENT,
            )
        if not ok:
            caveats.append(
                f"at t={t:g} the least branch value {lo:.10g} and the sampled sphere minimum {s.psi:.10g} disagree"
            )
    out = {"psi_vs_branches": rows}
    if not verdict.attains_infimum and verdict.bounded_below and samples and samples[-1] is not None:
        target = float(verdict.optimal_value)
        psi = samples[-1].psi
        ok = abs(psi - target) <= LIMIT_CONSISTENCY * (1 + abs(target))
        out["largest_radius_vs_infimum"] = {"psi": psi, "optimal_value": target, "ok": ok}
        if not ok:
            caveats.append("the sphere minimum at the largest radius is far from the unattained infimum")
    return out


def _exact_critical_min(problem: Problem, cfg: RunConfig):
    crit = []
    for J in enumerate_active_sets(problem):
        cvp = _eliminate(eliminate_to_critical_values, build_critical_system(problem, J, with_value=True), cfg, J.label())
        crit.extend(certify_critical_values(cvp, problem, J, cfg.oracle))
    return crit


def _run_bounded(problem: Problem, cfg: RunConfig, caveats: list[str], radius):
    """The feasible set misses a sampled sphere: minima exist by compactness."""
    caveats.append(
        f"no feasible point found at radius {radius:g}; the feasible set is treated as bounded "
        "and the tangency analysis is skipped"
    )
    crit: list[CertifiedCriticalValue] = []
    try:
        crit = _exact_critical_min(problem, cfg)
    except PipelineError as exc:
        caveats.append(f"critical values unavailable: {exc}")
    cs = CriticalSummary(crit)
    glob = minimize_global(problem, cfg.oracle)
    if cs.nonempty:
        value: ExtendedReal | float = cs.min_value
        status = "certified"
        if glob is not None and glob[0] < float(value) - 1e-6 * (1 + abs(float(value))):
            caveats.append("the numeric global minimum lies below the least critical value; regularity may fail")
    elif glob is not None:
        value, status = glob[0], "heuristic"
        caveats.append("optimal value is a numeric estimate")
    else:
        raise PipelineError("numeric-oracle", "no feasible point found at all", "check that the feasible set is nonempty", EXIT_INPUT)
    rule = "bounded feasible set"
    just = [
        Justification(k, rule, s, [f"no feasible point at radius {radius:g}"])
        for k, s in (
            ("bounded_below", "a continuous function is bounded on a compact set"),
            ("optimal_value", "the minimum over a compact set is the least critical value"),
            ("attains_infimum", "a continuous function attains its minimum on a compact set"),
            ("solution_set_compact", "closed subsets of a compact set are compact"),
            ("coercive", "there are no feasible sequences escaping to infinity"),
        )
    ]
    v = Verdict(True, True, YES, True, value, just)
    v.status = {k: "certified" for k in ("bounded_below", "attains_infimum", "solution_set_compact", "coercive")}
    v.status["optimal_value"] = status
    v.check_lattice()
    return v, {
        "critical_values": [c.to_json() for c in crit],
        "meta": {"bounded_domain": True, "global_minimum_estimate": glob[0] if glob else None},
    }


def _run_constant(problem: Problem, caveats: list[str]):
    c = problem.objective.constant_term()
    rule = "constant objective"
    just = [
        Justification(k, rule, s, [f"f = {c}"])
        for k, s in (
            ("bounded_below", "a constant is bounded below"),
            ("optimal_value", "every feasible point has the same value"),
            ("attains_infimum", "every feasible point is a minimizer"),
            ("solution_set_compact", "the minimizer set is the whole unbounded feasible set"),
            ("coercive", "the objective does not grow"),
        )
    ]
    v = Verdict(True, True, NO, False, ExtendedReal.finite(RealAlgebraic.rational(c)), just)
    v.status = {k: "certified" for k in ("bounded_below", "attains_infimum", "solution_set_compact", "coercive", "optimal_value")}
    v.check_lattice()
    caveats.append("constant objective: the tangency analysis is skipped")
    return v, {"meta": {"constant_objective": True}}


# -- numeric only -----------------------------------------------------------------------

def numeric_radii(radii: Sequence[float], count: int = 10) -> list[float]:
    lo, hi = math.log10(radii[0]), math.log10(radii[-1])
    return [float(10**x) for x in np.linspace(lo, hi, count)]


def _run_numeric(problem: Problem, cfg: RunConfig, caveats: list[str]):
    radii = numeric_radii(cfg.radii)
    samples = psi_grid(problem, radii, cfg.oracle)
    caveats.append("numeric mode: every verdict is heuristic evidence, not a certificate")
    caveats.extend(_agreement_caveats(samples))
    glob = minimize_global(problem, cfg.oracle)
    extra = {"psi_samples": _psi_json(samples, radii), "samples": samples}
    if any(s is None for s in samples):
        caveats.append("some spheres have no feasible point; the feasible set looks bounded")
        if glob is None:
            raise PipelineError("numeric-oracle", "no feasible point found", "check the constraints", EXIT_INPUT)
        v = heuristic_verdict(True, True, YES, True, glob[0], ["bounded feasible set"])
        extra["meta"] = {"global_minimum_estimate": glob[0]}
        return v, extra
    fit = fit_leading_term([(s.t, s.psi) for s in samples])
    if fit.flagged:
        caveats.append("the sampled sphere minimum changes sign; the fit uses the tail only")
    lim = fit.limit_estimate
    best = glob[0] if glob is not None else min(s.psi for s in samples)
    bounded = lim > -math.inf
    tol = 1e-6 * (1 + abs(best))
    if not bounded:
        value, attained, compact = -math.inf, False, NOT_APPLICABLE
    else:
        value = min(best, lim)
        attained = glob is not None and best <= lim + tol
        if not attained:
            compact = NOT_APPLICABLE
        else:
            compact = YES if lim > best + tol else NO
    coercive = lim == math.inf and attained
    notes = [f"alpha ~ {fit.alpha:.4g}", f"a ~ {fit.a:.6g}", f"r2 = {fit.r2:.6f}", f"best sampled value {best:.10g}"]
    v = heuristic_verdict(bounded, attained, compact, coercive, value, notes)
    extra["meta"] = {
        "fit": {"alpha": fit.alpha, "a": fit.a, "r2": fit.r2, "flagged": fit.flagged, "limit_estimate": _float_json(lim)},
        "global_minimum_estimate": glob[0] if glob else None,
    }
    return v, extra


def _float_json(x: float):
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return x
