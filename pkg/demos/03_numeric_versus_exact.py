"""Why the default mode is hybrid, shown on a slowly converging example.

    python3 demos/03_numeric_versus_exact.py

On the lifted (xy - 1)^2 + |y| the sphere minimum decays like 1/t.  The
numeric mode only sees samples and fits psi(t) ~ a t^alpha.  Its answers
happen to be right here, but they rest on a fit over finitely many radii,
so every one is labelled heuristic.  The hybrid mode reads the same limit
off an exact Puiseux expansion and settles attainment by comparing it with
the exact critical value 1.
"""

import pathlib

from tangent_inf.oracle import OracleConfig
from tangent_inf.pipeline import RunConfig, run

ROOT = pathlib.Path(__file__).resolve().parent.parent
path = str(ROOT / "fixtures" / "example3.problem")


def show(report, title):
    print(title)
    for key, entry in report.data["verdicts"].items():
        value = entry.get("value", entry.get("exact", entry.get("estimate", entry.get("infinite"))))
        print(f"    {key:<22} {str(value):<16} [{entry['status']}]")
    print()


numeric = run(RunConfig(input=path, mode="numeric", oracle=OracleConfig(starts=32)))
show(numeric, "numeric mode (samples and a power-law fit):")
for row in numeric.data["psi_samples"]:
    print(f"    psi({row['t']:g}) = {row['psi']:.3e}")
print()

hybrid = run(RunConfig(input=path))
show(hybrid, "hybrid mode (exact branches, numerically certified):")
for b in hybrid.data["branches"]:
    if b["counted"] and b["lambda"].get("exact") is not None:
        print(f"    bounded branch v ~ {b['series']}  ->  limit {b['lambda']['exact']}")
crit = [c["value"]["exact"] for c in hybrid.data["critical_values"] if c["counted"]]
print(f"    critical values: {crit}")
print("    0 < 1, so the infimum 0 is approached along the branch and never attained.")
