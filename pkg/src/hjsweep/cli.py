"""``hj-sweep`` command line: convergence studies, CFL scans, problem listing.

Exit codes: 0 success, 2 some run did not converge, 3 some run diverged,
64 usage error. Worker processes are taken from ``HJSWEEP_WORKERS``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .problems import get_problem, registry
from .reconstruction import WeightParams
from .solver import SchemeKind
from .study import (DIVERGED, NOT_CONVERGED, RunConfig, fastest_cfl, run_cfl_scan,
                    run_convergence_study)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_DIVERGED = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--problem", required=True, help="problem name (see list-problems)")
    p.add_argument("--scheme", default=SchemeKind.FE_FSM.value,
                   choices=[s.value for s in SchemeKind])
    p.add_argument("--n", type=_int_list, default=None,
                   help="mesh ladder, cells per axis, e.g. 40,80,160 (default: problem ladder)")
    p.add_argument("--mode", default="hweno", choices=("hweno", "hybrid"))
    p.add_argument("--tol", type=float, default=1e-14)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--stride", type=int, default=4, help="history checkpoint stride")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hj-sweep",
                     description="High-order fixed-point fast sweeping for static HJ equations")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="convergence study over a mesh ladder")
    _add_common(run)
    run.add_argument("--cfl", type=float, default=None,
                     help="CFL number (default 1.0, 0.1 for fe-jacobi)")

    scan = sub.add_parser("scan-cfl", help="compare CFL numbers on the finest mesh")
    _add_common(scan)
    scan.add_argument("--cfl", type=_float_list, required=True, help="e.g. 0.8,1.0,1.2")

    sub.add_parser("list-problems", help="print the built-in problems")
    return parser


def _config(args, cfl) -> RunConfig:
    ladder = args.n if args.n else get_problem(args.problem).ladder
    return RunConfig(problem=args.problem, ladder=tuple(ladder), scheme=SchemeKind(args.scheme),
                     cfl=cfl, mode=args.mode, tol=args.tol, max_iter=args.max_iter,
                     out=args.out, stride=args.stride,
                     weights=WeightParams(epsilon=args.epsilon))


def _exit_code(results) -> int:
    if any(r.status == DIVERGED for r in results):
        return EXIT_DIVERGED
    if any(r.status == NOT_CONVERGED for r in results):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _report(results, out=sys.stdout):
    print(f"{'N':>6} {'cfl':>6} {'L1':>10} {'Linf':>10} {'iter':>7} {'time':>8}  status", file=out)
    for r in results:
        l1 = "-" if r.l1 is None else f"{r.l1:.2e}"
        li = "-" if r.linf is None else f"{r.linf:.2e}"
        print(f"{r.n:>6} {r.cfl:>6g} {l1:>10} {li:>10} {r.iterations:>7} {r.wall_time:>8.2f}  "
              f"{r.status}", file=out)
        if r.message:
            print(f"       {r.message}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "list-problems":
        for spec in registry():
            print(f"{spec.name:<18} {spec.description}")
        return EXIT_OK

    try:
        if args.command == "run":
            config = _config(args, args.cfl)
            results = run_convergence_study(config)
        else:
            config = _config(args, None)
            results = run_cfl_scan(config, args.cfl)
    except KeyError:
        print(f"hj-sweep: unknown problem {args.problem!r}; try 'hj-sweep list-problems'",
              file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"hj-sweep: {exc}", file=sys.stderr)
        return EXIT_USAGE

    _report(results)
    if args.command == "scan-cfl":
        best = fastest_cfl(results)
        print(f"fastest converging cfl: {best if best is not None else 'none'}")
    print(f"results written to {config.out}")
    return _exit_code(results)


if __name__ == "__main__":
    sys.exit(main())
