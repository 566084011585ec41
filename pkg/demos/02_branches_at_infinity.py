"""Step by step through the pipeline on f = x + y over the plane.

    python3 demos/02_branches_at_infinity.py

1. The tangency system: where is f stationary on the circle of radius t?
2. Eliminating x, y and the multiplier leaves one curve P(t, v) = 0 relating
   the radius to the objective value at those points.
3. Newton-Puiseux expansion of P at t -> infinity gives v = a t^alpha + ...
   for each branch, with a an exact algebraic number.
4. Each branch is checked against real tangency points found numerically.
5. The sampled sphere minimum psi(t) follows the lowest branch.
"""

from tangent_inf.asymptotics import certify_branches, expand_curve
from tangent_inf.elimination import eliminate_to_plane_curve
from tangent_inf.oracle import OracleConfig, psi_grid
from tangent_inf.problem import make_problem
from tangent_inf.systems import build_tangency_system, enumerate_active_sets

problem = make_problem(("x", "y"), "x + y")
(everything,) = enumerate_active_sets(problem)
cfg = OracleConfig(starts=16)

system = build_tangency_system(problem, everything)
print("tangency system (the last variable is the objective value v):")
for line in system.describe():
    print("   ", line)

curve = eliminate_to_plane_curve(system)
print("\neliminated curve:  ", curve.to_str(), "= 0")

branches = certify_branches(expand_curve(curve), problem, everything, [1e2, 1e3, 1e4], cfg)
print("\nbranches at infinity:")
for b in branches:
    lead = b.leading_coeff
    print(f"    v ~ {b.series_str():<20} a = {lead.describe():<28} limit {b.limit.describe():>5}"
          f"   feasible: {b.certified_feasible}")

print("\nsphere minima against the lowest branch:")
for s in psi_grid(problem, [1e2, 1e3, 1e4], cfg):
    low = min(b.prediction_at(s.t) for b in branches if b.counts)
    print(f"    t = {s.t:>7g}   psi = {s.psi:>14.6f}   lowest branch = {low:>14.6f}")

print("\nA branch with limit -inf means the problem is unbounded below.")
