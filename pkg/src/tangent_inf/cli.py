"""Command-line entry point: ``tangent-inf --input FILE [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .asymptotics import DEFAULT_RADII
from .groebner import DEFAULT_BUDGET
from .oracle import OracleConfig
from .pipeline import EXIT_INPUT, PipelineError, RunConfig, run
from .puiseux import DEFAULT_DEPTH
from .report import emit_report


def _radii(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad radius list {text!r}") from exc


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tangent-inf",
        description="Decide boundedness, attainment and coercivity of a polynomial problem from its behaviour at infinity.",
    )
    p.add_argument("--input", required=True, help="problem file")
    p.add_argument("--mode", choices=("symbolic", "numeric", "hybrid"), default="hybrid")
    p.add_argument("--radii", type=_radii, default=list(DEFAULT_RADII), help="comma-separated certification radii")
    p.add_argument("--starts", type=int, default=64, help="multi-start count for the numeric oracle")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--gb-budget", type=int, default=DEFAULT_BUDGET, help="Groebner reduction-step budget")
    p.add_argument("--elimination", choices=("auto", "groebner", "resultant"), default="auto")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="Puiseux expansion depth")
    p.add_argument("--json", dest="json_path", help="write the JSON report here")
    p.add_argument("--psi-csv", help="write sampled sphere minima as CSV")
    p.add_argument("--quiet", action="store_true", help="no console summary")
    p.add_argument("--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = RunConfig(
            input=args.input,
            mode=args.mode,
            radii=args.radii,
            oracle=OracleConfig(starts=args.starts, seed=args.seed),
            gb_budget=args.gb_budget,
            elimination=args.elimination,
            depth=args.depth,
            json_path=args.json_path,
            psi_csv=args.psi_csv,
            verbose=args.verbose,
        )
    except ValueError as exc:
        print(f"tangent-inf: [cli-report] {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = run(cfg)
        text = emit_report(report, cfg.json_path, human=not args.quiet, psi_csv=cfg.psi_csv)
    except PipelineError as exc:
        print(f"tangent-inf: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"tangent-inf: [cli-report] {exc}", file=sys.stderr)
        return EXIT_INPUT
    if text:
        sys.stdout.write(text)
    if args.verbose:
        for k, v in report.data["meta"].get("timing", {}).items():
            logging.info("%s: %.2f", k, v)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
