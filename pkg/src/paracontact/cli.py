"""``verify`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .checks import PreconditionError
from .kernel import DEFAULT_SAMPLES, DEFAULT_SEED
from .models import ModelError, resolve
from .suites import SUITES, TOL_ENV, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="verify",
        description="Run named verification suites against a built-in or JSON-defined model.",
        epilog=f"Default tolerance: 1e-8 on charts, 1e-10 on frames; the {TOL_ENV} environment "
               "variable overrides it and --tol overrides both.")
    ap.add_argument("suite", choices=["all", *SUITES])
    ap.add_argument("--model", default="builtin:darboux2", help="builtin:<name> or a JSON model file")
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    ap.add_argument("--tol", type=float, default=None)
    ap.add_argument("--report", type=Path, default=None, help="write the JSON report here")
    return ap


def _line(rep) -> str:
    ok = sum(bool(c) for c in rep.checks)
    tail = f" ({rep.reason})" if rep.reason else f"  {ok}/{len(rep.checks)} checks passed"
    return f"{rep.status.upper():8s}{rep.suite:22s}{tail}"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.samples < 1:
        print("verify: --samples must be positive", file=sys.stderr)
        return EXIT_ERROR
    try:
        bm = resolve(args.model)
        reports = run_suite(args.suite, bm, args.seed, args.samples, args.tol)
    except (ModelError, PreconditionError, KeyError, ValueError) as exc:
        print(f"verify: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"model {bm.name}  seed {args.seed}  samples {args.samples}")
    for rep in reports:
        print(_line(rep))
        for c in rep.checks:
            if not c:
                print(f"        failed {c.name}: residual {c.residual:.3g} > {c.tol:g} at {c.worst}")
    if args.report is not None:
        args.report.write_text(json.dumps([r.to_dict() for r in reports], indent=1) + "\n")
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
