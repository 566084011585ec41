"""Four small problems and what the tool concludes about each.

Run from the repository root:

    python3 demos/01_worked_examples.py

Each problem file lives in fixtures/.  The first three are the classic
trio (a coercive objective, an unbounded linear one, and one whose infimum
is approached but never reached); the fourth has a whole curve of
minimizers running off to infinity.
"""

import pathlib
import time

from tangent_inf.pipeline import RunConfig, run
from tangent_inf.report import summary

ROOT = pathlib.Path(__file__).resolve().parent.parent

STORIES = {
    "example1": "x^2 + |y|: grows in every direction, so the minimum at the origin is the only one.",
    "example2": "x + y: the ray x = y < 0 drags the value to -inf.",
    "example3": "(xy - 1)^2 + |y|: along the hyperbola with y -> 0 the value creeps down to 0 "
    "but the only critical value is 1, so 0 is never attained.",
    "hyperbola": "(xy - 1)^2: the minimum 0 is attained, but on the whole unbounded curve xy = 1.",
}

for name, story in STORIES.items():
    print("=" * 78)
    print(f"{name}: {story}")
    print("-" * 78)
    start = time.perf_counter()
    report = run(RunConfig(input=str(ROOT / "fixtures" / f"{name}.problem")))
    print(summary(report), end="")
    print(f"({time.perf_counter() - start:.1f} s)")
