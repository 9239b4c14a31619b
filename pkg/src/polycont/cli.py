"""Command-line front end: solve, bench, witness, maps, serve.

Exit codes: 0 on success, 1 on input problems (bad flags, unreadable or
ill-formed files, non-square systems, degenerate inputs), 2 on internal
errors.  The default worker count comes from the POLYCONT_WORKERS
environment variable; --tasks overrides it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional, Sequence

from .homotopy import NotSquareError, ZeroDegreePolynomialError
from .jsonio import report_to_dict
from .maps import NotBinomialError, format_map, solve_binomials
from .poly import DimensionMismatchError, parse_system
from .solver import (
    SolverOptions,
    bench_cyclic,
    bench_to_csv,
    format_solutions,
    solve_blackbox,
)
from .witness import format_witness, monodromy_breakup, witness_solve
from .xnum import DomainError, Precision

WORKER_BUDGET_ENV = "POLYCONT_WORKERS"
_PRECISIONS = {p.value: p for p in Precision}


class UsageError(Exception):
    """Bad flags or arguments; prints usage and exits 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we map usage to 1
        raise UsageError(message)


def _default_tasks() -> int:
    raw = os.environ.get(WORKER_BUDGET_ENV, "0")
    try:
        return max(0, int(raw))
    except ValueError:
        return 0


def _build_parser() -> _Parser:
    p = _Parser(prog="polycont", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", metavar="command")

    def common(sp):
        sp.add_argument("--tasks", type=int, default=_default_tasks(),
                        help="worker processes (0 = in-process)")
        sp.add_argument("--precision", choices=sorted(_PRECISIONS), default="d")
        sp.add_argument("--seed", type=int, default=SolverOptions().seed)

    sp = sub.add_parser("solve", help="solve a square system from a .sys file")
    sp.add_argument("file")
    common(sp)
    fmt = sp.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", dest="as_json",
                     help="emit the v1 JSON schema instead of text blocks")
    fmt.add_argument("--phc-format", action="store_true", dest="as_phc",
                     help="emit solution text blocks (default)")
    sp.add_argument("--out", help="write output to this path instead of stdout")

    sp = sub.add_parser("bench", help="elapsed-time grid over tasks x precision")
    sp.add_argument("family", help="cyclic<N>, e.g. cyclic7")
    sp.add_argument("--tasks", default="1",
                    help="comma-separated worker counts, e.g. 1,8")
    sp.add_argument("--precision", default="d,dd",
                    help="comma-separated precisions from d,dd,qd")
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--csv", help="also write the table to this CSV path")

    sp = sub.add_parser("witness", help="witness set of a positive-dimensional system")
    sp.add_argument("file")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--factor", action="store_true",
                    help="run monodromy + trace factorization")
    common(sp)
    sp.add_argument("--out", help="write the witness file here instead of stdout")

    sp = sub.add_parser("maps", help="monomial maps of a binomial system")
    sp.add_argument("file")
    sp.add_argument("--all", action="store_true", dest="all_dims",
                    help="include maps below the top dimension")

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--port", type=int, default=8032)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--ui", metavar="DIR", default=None,
                    help="also serve a built browser UI from DIR at /")
    return p


def _read_system(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_system(fh.read())


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args) -> int:
    s = _read_system(args.file)
    opts = SolverOptions(
        tasks=args.tasks, precision=_PRECISIONS[args.precision], seed=args.seed
    )
    report = solve_blackbox(s, opts)
    if args.as_json:
        text = json.dumps(report_to_dict(report), indent=2) + "\n"
    else:
        counts = ", ".join(f"{k}: {v}" for k, v in report.counts.items())
        text = (
            f"tracked {report.total_paths} paths in "
            f"{report.elapsed_seconds:.3f}s ({counts})\n"
            + format_solutions(report)
        )
    _emit(text, args.out)
    return 0


def _cmd_bench(args) -> int:
    family = args.family.strip().lower()
    if not family.startswith("cyclic"):
        raise UsageError(f"unknown family {args.family!r}; expected cyclic<N>")
    try:
        n = int(family[len("cyclic"):])
    except ValueError:
        raise UsageError(f"unknown family {args.family!r}; expected cyclic<N>")
    try:
        tasks = [int(v) for v in args.tasks.split(",") if v != ""]
    except ValueError:
        raise UsageError(f"--tasks must be comma-separated integers, got {args.tasks!r}")
    precs = []
    for name in args.precision.split(","):
        name = name.strip()
        if name not in _PRECISIONS:
            raise UsageError(f"unknown precision {name!r}")
        precs.append(_PRECISIONS[name])
    bench = bench_cyclic(n, tasks, precs, seed=args.seed)
    csv = bench_to_csv(bench)
    sys.stdout.write(f"system: {bench['system']}\n{csv}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(csv)
    return 0


def _cmd_witness(args) -> int:
    s = _read_system(args.file)
    opts = SolverOptions(
        tasks=args.tasks, precision=_PRECISIONS[args.precision], seed=args.seed
    )
    w = witness_solve(s, args.dim, opts)
    _emit(format_witness(w), args.out)
    if args.factor:
        part = monodromy_breakup(w, seed=args.seed, opts=opts)
        state = "certified" if part.certified else "not certified"
        sys.stdout.write(
            f"factors: {len(part.blocks)} ({state}, {part.loops} loops)\n"
        )
        for k, (block, deg) in enumerate(zip(part.blocks, part.degrees)):
            pts = ", ".join(str(i) for i in block)
            sys.stdout.write(f"factor {k + 1}: degree {deg}, points [{pts}]\n")
    return 0


def _cmd_maps(args) -> int:
    s = _read_system(args.file)
    maps = solve_binomials(s.nvars, s, puretopdim=not args.all_dims)
    for k, m in enumerate(maps):
        if k:
            sys.stdout.write("\n")
        for line in format_map(m):
            sys.stdout.write(line + "\n")
    if not maps:
        sys.stdout.write("no maps (inconsistent binomial system)\n")
    return 0


def _cmd_serve(args) -> int:
    from .service import http_serve

    if args.ui is not None and not os.path.isdir(args.ui):
        raise FileNotFoundError(f"UI directory not found: {args.ui}")
    http_serve(port=args.port, host=args.host, static_dir=args.ui)
    return 0


_INPUT_ERRORS = (
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
    UnicodeDecodeError,
    ValueError,  # parse errors, NotBinomial, Domain..., bad options
    NotSquareError,
    ZeroDegreePolynomialError,
    DomainError,
    DimensionMismatchError,
    NotBinomialError,
)


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except UsageError as exc:
        sys.stderr.write(f"{parser.format_usage()}error: {exc}\n")
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    if not args.command:
        sys.stderr.write(parser.format_help())
        return 1
    handlers = {
        "solve": _cmd_solve,
        "bench": _cmd_bench,
        "witness": _cmd_witness,
        "maps": _cmd_maps,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except _INPUT_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except KeyboardInterrupt:
        return 1
    except Exception as exc:  # internal faults are distinguishable by code 2
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
