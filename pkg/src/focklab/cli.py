"""``focklab`` command line.

Exit codes: 0 ok, 1 assertion failure, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import CATALOG, COMMANDS, ExperimentConfig, Report
from .fock import KernelRangeError
from .ida import IRLSConvergenceError
from .quad import QuadratureError

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
NUMERICAL_ERRORS = (QuadratureError, IRLSConvergenceError, KernelRangeError,
                    FloatingPointError, OverflowError, ArithmeticError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="focklab", description="Hankel operators on Fock spaces: numerical experiments")
    ap.add_argument("command", choices=["selftest", *COMMANDS])
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--r", type=float, default=2.0)
    ap.add_argument("--s", type=float, default=None, help="override the IDA exponent")
    ap.add_argument("--delta", type=float, default=0.5, help="lattice spacing")
    ap.add_argument("--radius", type=float, default=8.0, help="lattice bounding radius")
    ap.add_argument("--basis-degree", type=int, default=30, metavar="M")
    ap.add_argument("--ida-degree", type=int, default=8, metavar="D")
    ap.add_argument("--grid-points", type=int, default=120)
    ap.add_argument("--lattice-size", type=int, default=25,
                    help="lattice points used by lower-chain")
    ap.add_argument("--symbol", action="append", default=None,
                    help="symbol expression (repeatable); default is the frozen catalog")
    ap.add_argument("--measure", default=None, help="atoms .csv or '<symbol>^<power>[@<radius>]'")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="output CSV path (default stdout)")
    ap.add_argument("--corrupt-grid-tolerance", action="store_true",
                    help="selftest negative control: declare a loose plane-grid tolerance")
    return ap


def _config(ns) -> ExperimentConfig:
    return ExperimentConfig(
        alpha=ns.alpha, p=ns.p, r=ns.r, s=ns.s, delta=ns.delta, radius=ns.radius,
        basis_degree=ns.basis_degree, ida_degree=ns.ida_degree, grid_points=ns.grid_points,
        symbols=tuple(ns.symbol) if ns.symbol else CATALOG, measure=ns.measure,
        seed=ns.seed, lattice_size=ns.lattice_size, out=ns.out,
    )


def _selftest(cfg: ExperimentConfig, corrupt: bool) -> tuple[Report, int]:
    from .selftest import run_selftest

    results = run_selftest(cfg.seed, corrupt, cfg.grid_points)
    rep = Report("selftest", cfg, [r.row() for r in results])
    failed = [r for r in results if not r.passed]
    print(f"selftest: {len(results) - len(failed)}/{len(results)} assertions passed",
          file=sys.stderr)
    if failed:
        f = failed[0]
        print(f"FAIL module={f.module} op={f.op} expected={f.expected} got={f.got}",
              file=sys.stderr)
        return rep, EXIT_ASSERT
    return rep, EXIT_OK


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = _config(ns)
    except (ValueError, TypeError) as exc:
        print(f"focklab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code = EXIT_OK
    try:
        if ns.command == "selftest":
            rep, code = _selftest(cfg, ns.corrupt_grid_tolerance)
        else:
            rep = COMMANDS[ns.command](cfg)
        text = rep.to_csv()
    except NUMERICAL_ERRORS as exc:
        print(f"focklab: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"focklab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.out:
        try:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"focklab: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
