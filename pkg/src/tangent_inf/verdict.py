"""From certified branch limits and critical values to the final verdicts.

Every decision is an exact comparison of extended reals.  The rules:

* bounded below  <=>  no counted branch has limit -inf
* optimal value   =   min(smallest critical value, smallest branch limit)
* attained       <=>  some critical value exists and the smallest one is at
                      most every non-constant branch limit
* compact        <=>  attained and the smallest critical value is strictly
                      below every constant branch limit
* coercive       <=>  every counted branch has limit +inf
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .algebraic import ExtendedReal, ext_min
from .asymptotics import CertifiedCriticalValue, PuiseuxBranch

YES, NO, NOT_APPLICABLE = "yes", "no", "not_applicable"


class TieUnresolved(ArithmeticError):
    pass


class LatticeViolation(AssertionError):
    pass


def _lt(a: ExtendedReal, b: ExtendedReal) -> bool:
    try:
        return a < b
    except ArithmeticError as exc:  # refinement cap hit
        raise TieUnresolved(str(exc)) from exc


def _le(a: ExtendedReal, b: ExtendedReal) -> bool:
    return not _lt(b, a)


def _min(values) -> ExtendedReal:
    try:
        return ext_min(values)
    except ArithmeticError as exc:
        raise TieUnresolved(str(exc)) from exc


@dataclass
class CriticalSummary:
    values: list[CertifiedCriticalValue]

    @property
    def counted(self) -> list[CertifiedCriticalValue]:
        return [v for v in self.values if v.counts]

    @property
    def nonempty(self) -> bool:
        return bool(self.counted)

    @property
    def min_value(self) -> ExtendedReal:
        """Smallest counted critical value, +inf for an empty critical set."""
        return _min(ExtendedReal.finite(v.value) for v in self.counted)


def _branch_id(b: PuiseuxBranch, index: int) -> str:
    return f"{b.active_set.label()}#{index}"


@dataclass
class Justification:
    verdict: str
    rule: str
    statement: str
    inputs: list[str]

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "rule": self.rule, "statement": self.statement, "inputs": self.inputs}


@dataclass
class Verdict:
    bounded_below: bool
    attains_infimum: bool
    solution_set_compact: str
    coercive: bool
    optimal_value: ExtendedReal | float
    justification: list[Justification] = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)
    status: dict[str, str] = field(default_factory=dict)
    conditional_on: dict[str, list[str]] = field(default_factory=dict)

    def check_lattice(self) -> None:
        """coercive => attained => bounded below; compact => attained; value = -inf iff unbounded."""
        problems = []
        if self.coercive and not self.attains_infimum:
            problems.append("coercive but infimum not attained")
        if self.attains_infimum and not self.bounded_below:
            problems.append("attained but not bounded below")
        if self.solution_set_compact == YES and not self.attains_infimum:
            problems.append("compact solution set but infimum not attained")
        if (self.solution_set_compact == NOT_APPLICABLE) == self.attains_infimum:
            problems.append("compactness applicability disagrees with attainment")
        neg_inf = isinstance(self.optimal_value, ExtendedReal) and self.optimal_value.kind < 0
        if isinstance(self.optimal_value, float):
            neg_inf = self.optimal_value == float("-inf")
        if neg_inf == self.bounded_below:
            problems.append("optimal value -inf must match unboundedness")
        if problems:
            raise LatticeViolation("; ".join(problems))

    def value_json(self) -> dict:
        if isinstance(self.optimal_value, ExtendedReal):
            return self.optimal_value.to_json()
        v = self.optimal_value
        if v in (float("inf"), float("-inf")):
            return {"infinite": "+inf" if v > 0 else "-inf"}
        return {"estimate": v}

    def to_json(self) -> dict:
        def entry(name, value):
            d = {"value": value, "status": self.status.get(name, "certified")}
            if name in self.conditional_on:
                d["conditional_on"] = self.conditional_on[name]
            return d

        return {
            "bounded_below": entry("bounded_below", self.bounded_below),
            "attains_infimum": entry("attains_infimum", self.attains_infimum),
            "solution_set_compact": entry("solution_set_compact", self.solution_set_compact),
            "coercive": entry("coercive", self.coercive),
            "optimal_value": {**self.value_json(), "status": self.status.get("optimal_value", "certified")},
        }


# -- individual decisions ------------------------------------------------------------

def decide_bounded_below(branches: Sequence[PuiseuxBranch]) -> tuple[bool, Justification]:
    bad = [
        f"{_branch_id(b, k)}: alpha={b.alpha}, leading coefficient {b.leading_coeff.describe()}"
        for k, b in enumerate(branches)
        if b.limit.kind < 0
    ]
    ok = not bad
    statement = (
        "every branch that grows has a positive leading coefficient, so no branch limit is -inf"
        if ok
        else "a growing branch has a negative leading coefficient, so its limit is -inf"
    )
    inputs = bad or [f"{len(branches)} branch limits, none -inf"]
    return ok, Justification("bounded_below", "boundedness", statement, inputs)


def optimal_value(
    branches: Sequence[PuiseuxBranch], cs: CriticalSummary
) -> tuple[ExtendedReal, Justification]:
    lam = _min(b.limit for b in branches)
    crit = cs.min_value
    value = lam if _lt(lam, crit) else crit
    return value, Justification(
        "optimal_value",
        "optimal-value formula",
        "the infimum is the smaller of the least critical value and the least branch limit",
        [f"least critical value {crit.describe()}", f"least branch limit {lam.describe()}"],
    )


def decide_attainment(branches: Sequence[PuiseuxBranch], cs: CriticalSummary) -> tuple[bool, Justification]:
    crit = cs.min_value
    moving = _min(b.limit for b in branches if not b.is_constant)
    ok = cs.nonempty and _le(crit, moving)
    if not cs.nonempty:
        statement = "the critical set is empty, so no point attains the infimum"
    elif ok:
        statement = "the least critical value does not exceed any non-constant branch limit"
    else:
        statement = "a non-constant branch tends to a value below every critical value"
    return ok, Justification(
        "attains_infimum",
        "attainment",
        statement,
        [f"least critical value {crit.describe()}", f"least non-constant branch limit {moving.describe()}"],
    )


def decide_compactness(
    branches: Sequence[PuiseuxBranch], cs: CriticalSummary, attained: bool
) -> tuple[str, Justification]:
    constant = _min(b.limit for b in branches if b.is_constant)
    crit = cs.min_value
    if not attained:
        return NOT_APPLICABLE, Justification(
            "solution_set_compact", "compactness", "the infimum is not attained; there is no solution set", []
        )
    ok = _lt(crit, constant)
    statement = (
        "the least critical value lies strictly below every constant branch value"
        if ok
        else "a constant branch sits at the optimal value, so minimizers escape to infinity"
    )
    return (YES if ok else NO), Justification(
        "solution_set_compact",
        "compactness",
        statement,
        [f"least critical value {crit.describe()}", f"least constant branch value {constant.describe()}"],
    )


def decide_coercive(branches: Sequence[PuiseuxBranch]) -> tuple[bool, Justification]:
    finite = [
        f"{_branch_id(b, k)}: limit {b.limit.describe()}" for k, b in enumerate(branches) if b.limit.kind <= 0
    ]
    ok = not finite
    statement = "every branch limit is +inf" if ok else "some branch limit is not +inf"
    return ok, Justification("coercive", "coercivity", statement, finite or [f"{len(branches)} branch limits, all +inf"])


# -- assembling ------------------------------------------------------------------------

def _decide(branches, cs) -> dict:
    bounded, j1 = decide_bounded_below(branches)
    if bounded:
        value, j2 = optimal_value(branches, cs)
    else:
        value = ExtendedReal.neg_inf()
        j2 = Justification(
            "optimal_value", "optimal-value formula", "unbounded below, so the infimum is -inf", []
        )
    attained, j3 = decide_attainment(branches, cs) if bounded else (
        False,
        Justification("attains_infimum", "attainment", "unbounded below, so nothing is attained", []),
    )
    compact, j4 = decide_compactness(branches, cs, attained)
    coercive, j5 = decide_coercive(branches)
    return {
        "bounded_below": bounded,
        "optimal_value": value,
        "attains_infimum": attained,
        "solution_set_compact": compact,
        "coercive": coercive,
        "justification": [j1, j2, j3, j4, j5],
    }


def decide_all(
    branches: Sequence[PuiseuxBranch],
    cs: CriticalSummary,
    undecided: Sequence[PuiseuxBranch] = (),
) -> Verdict:
    """Verdicts from the counted branches; flag those an undecided branch could flip."""
    caveats = []
    try:
        d = _decide(list(branches), cs)
    except TieUnresolved as exc:
        raise TieUnresolved(f"could not separate two algebraic values: {exc}") from exc
    v = Verdict(
        d["bounded_below"],
        d["attains_infimum"],
        d["solution_set_compact"],
        d["coercive"],
        d["optimal_value"],
        d["justification"],
        caveats,
    )
    v.status = {k: "certified" for k in ("bounded_below", "attains_infimum", "solution_set_compact", "coercive", "optimal_value")}
    if undecided:
        ids = [f"{b.active_set.label()}:{b.series_str()}" for b in undecided]
        alt = _decide(list(branches) + list(undecided), cs)
        for key in v.status:
            if d[key] != alt[key]:
                v.status[key] = "conditional"
                v.conditional_on[key] = ids
        if v.conditional_on:
            caveats.append(
                "some verdicts are conditional: branches whose reality could not be decided would change them"
            )
    v.check_lattice()
    return v


def heuristic_verdict(
    bounded: bool, attained: bool, compact: str, coercive: bool, value: float, notes: Sequence[str]
) -> Verdict:
    """A verdict built from numeric evidence only; every entry is labelled heuristic."""
    v = Verdict(bounded, attained, compact, coercive, value)
    v.justification = [
        Justification(k, "numeric fit", s, list(notes))
        for k, s in (
            ("bounded_below", "sign and growth rate of the fitted sphere minimum"),
            ("optimal_value", "smaller of the best sampled value and the fitted limit"),
            ("attains_infimum", "best sampled value compared with the fitted limit"),
            ("solution_set_compact", "fitted limit compared with the best sampled value"),
            ("coercive", "fitted growth exponent and sign"),
        )
    ]
    v.status = {k: "heuristic" for k in ("bounded_below", "attains_infimum", "solution_set_compact", "coercive", "optimal_value")}
    v.check_lattice()
    return v
