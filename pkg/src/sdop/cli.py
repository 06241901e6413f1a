"""Command line entry point: ``sdop run|sweep|check|oracle``.

Exit codes: 0 success, 2 validation error, 3 divergence, 4 scenario parse error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import runner
from .scenario import ScenarioError, bundled_scenarios
from .simulator import ConfigError, DivergenceError

EXIT_OK, EXIT_VALIDATION, EXIT_DIVERGENCE, EXIT_PARSE = 0, 2, 3, 4


def _values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdop",
        description="Simulate distributed shortest-distance dynamics with approximate projections.",
        epilog="bundled scenarios: " + ", ".join(bundled_scenarios()),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("scenario", help="scenario file (or the name of a bundled one)")
        p.add_argument("-o", "--override", action="append", default=[], metavar="KEY=VALUE",
                       help="replace a scenario key, e.g. integrator.t_end=50 (repeatable)")
        p.add_argument("-q", "--quiet", action="store_true", help="print nothing on success")

    p = sub.add_parser("run", help="simulate and write CSV, SVG and a JSON report")
    common(p)
    p.add_argument("--out", help="output directory (default: output.dir or ./out)")

    p = sub.add_parser("sweep", help="repeat a run over constant stepsize or angle values")
    common(p)
    p.add_argument("parameter", choices=sorted(runner.SWEEPABLE))
    p.add_argument("values", type=_values, help="comma-separated values, e.g. 0.05,0.2,0.5")
    p.add_argument("--out", help="directory for per-run outputs and sweep.csv")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")

    p = sub.add_parser("check", help="check assumptions and theorem hypotheses without simulating")
    common(p)
    p.add_argument("--theorem", action="append", choices=["T3", "T4", "T6"],
                   help="theorem to check (default: chosen from the scenario)")

    p = sub.add_parser("oracle", help="solve the centralized problem")
    common(p)
    p.add_argument("--tol", type=float, default=1e-12)
    return parser


def _say(args, text):
    if not args.quiet:
        print(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            rep = runner.run(args.scenario, args.override, out_dir=args.out)
            _say(args, rep.summary())
        elif args.command == "sweep":
            rows = runner.sweep(args.scenario, args.parameter, args.values, args.override,
                                out_dir=args.out, workers=args.workers)
            if args.out:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                runner.write_sweep_csv(rows, Path(args.out) / "sweep.csv")
            lines = [f"{args.parameter:>16} {'residual':>12} {'H':>12}  status"]
            lines += [f"{r.value:>16.6g} {r.residual:>12.4e} {r.H:>12.4e}  {r.status} {r.error}".rstrip()
                      for r in rows]
            _say(args, "\n".join(lines))
            if any(r.status != "ok" for r in rows):
                return EXIT_VALIDATION
        elif args.command == "check":
            rep = runner.check(args.scenario, args.override, theorems=args.theorem)
            _say(args, str(rep))
            if not rep.ok:
                return EXIT_VALIDATION
        elif args.command == "oracle":
            sol = runner.oracle(args.scenario, args.override, tol=args.tol)
            _say(args, f"x* = {np.array2string(sol.x_star, precision=12)}\n"
                       f"f* = {sol.f_star:.12g}\n"
                       f"intersection {'nonempty' if sol.intersection_nonempty else 'empty'}\n"
                       f"fixed-point residual {sol.residual:.2e} after {sol.iterations} iterations\n"
                       f"unique: {sol.unique}")
    except ScenarioError as exc:
        print(f"sdop: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"sdop: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DivergenceError as exc:
        print(f"sdop: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (runner.ValidationError, ConfigError) as exc:
        print(f"sdop: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
