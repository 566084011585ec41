import pytest
from gmpy2 import mpq

from tangent_inf.algebraic import ExtendedReal, RealAlgebraic
from tangent_inf.asymptotics import CertifiedCriticalValue, PuiseuxBranch
from tangent_inf.poly import parse_poly
from tangent_inf.puiseux import puiseux_branches
from tangent_inf.systems import ActiveSet
from tangent_inf.verdict import (
    NO,
    NOT_APPLICABLE,
    YES,
    CriticalSummary,
    LatticeViolation,
    TieUnresolved,
    Verdict,
    decide_all,
    decide_attainment,
    decide_bounded_below,
    decide_coercive,
    decide_compactness,
    optimal_value,
)

EMPTY = ActiveSet((), 0)


def certified(text, pick=None, feasible=True):
    """Certified branches of a (u, v) curve; ``pick`` filters by leading sign."""
    out = []
    for raw in puiseux_branches(parse_poly(text, ("u", "v"))):
        if not raw.is_real or (pick is not None and raw.leading.sign() != pick):
            continue
        out.append(PuiseuxBranch(raw, EMPTY, certified_real=True, certified_feasible=feasible))
    return out


def crit(*values):
    return CriticalSummary([CertifiedCriticalValue(RealAlgebraic.rational(mpq(v)), EMPTY, True) for v in values])


# shapes that mirror the worked examples
EX1 = certified("v - u") + certified("v^2 - u", pick=1) + certified("4*u - 4*v + 1")
EX2 = certified("v^2 - 2*u")
EX3 = certified("u*v^2 - 1", pick=1) + certified("v^2 - u", pick=1)
HYPERBOLA = certified("v") + certified("v - u")


def test_boundedness():
    assert decide_bounded_below(EX1)[0]
    assert not decide_bounded_below(EX2)[0]
    assert decide_bounded_below(EX3)[0]


def test_optimal_value():
    assert optimal_value(EX1, crit(0))[0].describe() == "0"
    assert optimal_value(EX3, crit(1))[0].describe() == "0"
    assert optimal_value(EX2, crit())[0].describe() == "-inf"


def test_attainment():
    assert decide_attainment(EX1, crit(0))[0]
    assert not decide_attainment(EX3, crit(1))[0]
    assert not decide_attainment(EX1, crit())[0]
    # origin of the quadrant: critical value 0 against two rising rays
    assert decide_attainment(certified("v^2 - u", pick=1) * 2, crit(0))[0]


def test_compactness():
    assert decide_compactness(EX1, crit(0), True)[0] == YES
    assert decide_compactness(HYPERBOLA, crit(0), True)[0] == NO
    assert decide_compactness(EX3, crit(1), False)[0] == NOT_APPLICABLE


def test_coercivity():
    assert decide_coercive(EX1)[0]
    assert not decide_coercive(EX3)[0]
    assert not decide_coercive(EX2)[0]


def test_full_verdicts():
    v = decide_all(EX1, crit(0))
    assert (v.bounded_below, v.attains_infimum, v.solution_set_compact, v.coercive) == (True, True, YES, True)
    v = decide_all(EX3, crit(1))
    assert (v.bounded_below, v.attains_infimum, v.solution_set_compact, v.coercive) == (True, False, NOT_APPLICABLE, False)
    assert v.optimal_value.describe() == "0"
    v = decide_all(EX2, crit())
    assert not v.bounded_below and v.optimal_value.describe() == "-inf"
    assert all(j.statement and j.rule for j in v.justification)
    assert {j.verdict for j in v.justification} == set(v.status)


def test_irrational_limits_compare_exactly():
    # constant branch at sqrt(2) against a critical value 7/5 < sqrt(2)
    branches = certified("v^2 - 2", pick=1)
    v = decide_all(branches, crit("7/5"))
    assert v.solution_set_compact == YES and v.optimal_value.describe() == "7/5"
    v = decide_all(branches, crit("3/2"))
    assert v.solution_set_compact == NO
    assert v.optimal_value.describe().startswith("root of a^2 - 2")


def test_undecided_branch_makes_verdicts_conditional():
    falling = certified("v^2 - 2*u", pick=-1)
    v = decide_all(EX1, crit(0), undecided=falling)
    assert v.status["bounded_below"] == "conditional"
    assert v.conditional_on["bounded_below"]
    assert v.status["optimal_value"] == "conditional"
    assert v.caveats
    # a branch that changes nothing leaves the verdicts certified
    harmless = certified("v - u")
    v = decide_all(EX1, crit(0), undecided=harmless)
    assert set(v.status.values()) == {"certified"} and not v.caveats


def test_tie_that_cannot_be_separated():
    # the same number given by a reducible defining polynomial never separates from sqrt(2)
    sqrt2 = RealAlgebraic([-2, 0, 1], 1, 2)
    clone = RealAlgebraic([10, -2, -5, 1], mpq(1), mpq(2))  # (a^2 - 2)(a - 5)
    branches = certified("v^2 - 2", pick=1)
    cs = CriticalSummary([CertifiedCriticalValue(clone, EMPTY, True)])
    assert branches[0].limit.value == sqrt2
    with pytest.raises(TieUnresolved):
        decide_all(branches, cs)


@pytest.mark.parametrize(
    "fields",
    [
        dict(bounded_below=True, attains_infimum=False, solution_set_compact=NOT_APPLICABLE, coercive=True),
        dict(bounded_below=False, attains_infimum=True, solution_set_compact=YES, coercive=False),
        dict(bounded_below=True, attains_infimum=False, solution_set_compact=YES, coercive=False),
        dict(bounded_below=True, attains_infimum=True, solution_set_compact=NOT_APPLICABLE, coercive=False),
    ],
)
def test_lattice_rejects_impossible_combinations(fields):
    v = Verdict(optimal_value=ExtendedReal.finite(0), **fields)
    with pytest.raises(LatticeViolation):
        v.check_lattice()


def test_lattice_ties_minus_infinity_to_unboundedness():
    v = Verdict(True, True, YES, False, ExtendedReal.neg_inf())
    with pytest.raises(LatticeViolation):
        v.check_lattice()
    Verdict(False, False, NOT_APPLICABLE, False, ExtendedReal.neg_inf()).check_lattice()


def test_uncounted_critical_values_are_ignored():
    cs = CriticalSummary([CertifiedCriticalValue(RealAlgebraic.rational(-5), EMPTY, False)])
    assert not cs.nonempty and cs.min_value.describe() == "+inf"
