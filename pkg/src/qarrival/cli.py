"""Command-line interface: validate, run, and sweep scenario files.

Exit codes: 0 success, 2 validation error, 3 numerical non-convergence
(fatal only under --strict, or when no outputs could be produced),
4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import IntegrationError, ScenarioError
from .scenario import parse_scenario, parse_sweep, run_scenario, run_sweep

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qarrival",
        description="Wave-packet detector-entry probabilities, two-state "
                    "detector registration, and arrival-time statistics.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario file")
    run.add_argument("scenario", help="path to the scenario file")
    run.add_argument("--out", default=None,
                     help="output directory (default: the scenario's "
                          "output.dir, else ./out)")
    run.add_argument("--strict", action="store_true",
                     help="exit 3 when any integral misses its tail criterion")

    sweep = sub.add_parser("sweep", help="run a one-parameter sweep file")
    sweep.add_argument("sweep", help="path to the sweep file")
    sweep.add_argument("--out", default="out", help="output directory (default: out)")
    sweep.add_argument("--jobs", type=int, default=1,
                       help="concurrent rows (default: 1)")
    sweep.add_argument("--strict", action="store_true",
                       help="exit 3 when any row misses a tail criterion")

    validate = sub.add_parser("validate", help="check a scenario file")
    validate.add_argument("scenario", help="path to the scenario file")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            parse_scenario(args.scenario)
            print(f"{args.scenario}: valid")
            return EXIT_OK
        if args.command == "run":
            scenario = parse_scenario(args.scenario)
            out = args.out
            if out is None:
                out = scenario.output_dir or "out"
                if scenario.output_dir is not None and not os.path.isabs(out):
                    out = os.path.join(scenario.base_dir, out)
            summary = run_scenario(scenario, out)
            print(f"wrote {os.path.join(out, 'summary.json')} "
                  f"(p_entry_final = {summary['p_entry_final']:.6g})")
            if args.strict and not summary["converged"]:
                print("tail criterion missed (strict mode)", file=sys.stderr)
                return EXIT_NUMERICAL
            return EXIT_OK
        spec = parse_sweep(args.sweep)
        rows = run_sweep(spec, args.out, jobs=max(1, args.jobs))
        failed = [r for r in rows if r["status"] != "ok"]
        print(f"wrote {args.out}/sweep.csv ({len(rows)} rows, {len(failed)} failed)")
        if args.strict and any(not r.get("converged", False) for r in rows
                               if r["status"] == "ok"):
            print("tail criterion missed in a row (strict mode)", file=sys.stderr)
            return EXIT_NUMERICAL
        return EXIT_OK
    except ScenarioError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IntegrationError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
