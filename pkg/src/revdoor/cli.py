"""Command line entry point.

    revdoor run <scenario.toml> [--seed N] [--paths N] [--steps N] [--out DIR] [--format json|csv|both]
    revdoor validate <scenario.toml>
    revdoor sweep <scenario.toml> --param beta_labor --values 0 0.2 0.4 ...

Exit codes: 0 success, 1 validation error, 2 runtime error, 3 I/O error.
The default output directory is ``$REVDOOR_OUT_DIR`` if set, else the
scenario's ``output.dir``.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from typing import Sequence

from revdoor.errors import InvalidInputError, RevdoorError, ValidationError
from revdoor.report import emit_report
from revdoor.scenario import FORMATS, SWEEP_PARAMS, Scenario, dump_scenario, load_scenario

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3
OUT_DIR_ENV = "REVDOOR_OUT_DIR"

log = logging.getLogger("revdoor")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="revdoor", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("scenario", help="TOML scenario file")
        sp.add_argument("--seed", type=int, help="override grid.seed")
        sp.add_argument("--paths", type=int, help="override grid.n_paths")
        sp.add_argument("--steps", type=int, help="override grid.n_steps")
        sp.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or output.dir)")
        sp.add_argument("--format", choices=FORMATS, help="report format (default output.format)")

    common(sub.add_parser("run", help="run both regimes and write reports"))
    v = sub.add_parser("validate", help="check a scenario and print it with defaults filled in")
    v.add_argument("scenario")
    sw = sub.add_parser("sweep", help="run a one-parameter sweep")
    common(sw)
    sw.add_argument("--param", default="beta_labor", choices=sorted(SWEEP_PARAMS))
    sw.add_argument("--values", type=float, nargs="+", required=True)
    return p


def _apply_overrides(s: Scenario, args: argparse.Namespace) -> Scenario:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.paths is not None:
        changes["n_paths"] = args.paths
    if args.steps is not None:
        changes["n_steps"] = args.steps
    if changes:
        try:
            s = s.with_grid(**changes)
        except InvalidInputError as exc:
            raise ValidationError("grid", str(exc)) from exc
        if s.antithetic and s.grid.n_paths % 2:
            raise ValidationError("grid.n_paths", "antithetic sampling needs an even path count")
    return s


def _run(s: Scenario, args: argparse.Namespace) -> int:
    from revdoor.pipeline import run_scenario

    out_dir = args.out or os.environ.get(OUT_DIR_ENV) or s.output.dir
    fmt = args.format or s.output.format
    rr = run_scenario(s)
    log.info("run finished in %.3f s", rr.wall_clock_s)
    for path in emit_report(rr, fmt, out_dir, s.output.prefix):
        print(path)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s | %(message)s")
    try:
        s = load_scenario(args.scenario)
        if args.command == "validate":
            sys.stdout.write(dump_scenario(s))
            return EXIT_OK
        s = _apply_overrides(s, args)
        if args.command == "sweep":
            s = dataclasses.replace(s, sweep_param=args.param, sweep_values=tuple(args.values))
            for value in s.sweep_values:
                s.with_param(s.sweep_param, value)
        return _run(s, args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (RevdoorError, ValueError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
