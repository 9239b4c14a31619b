"""Blackbox solving of square polynomial systems.

Pipeline: build a total-degree start system, blend it with the target
through a random-gamma homotopy, track every start point to t=1 (optionally
across a process pool), then classify, deduplicate, and report.

Path tracking is deterministic per start point regardless of how paths are
grouped into batches or distributed over workers, so a fixed (system, seed,
options) triple reproduces the same solutions byte for byte at any task
count.  Workers receive disjoint index ranges and results are reassembled
by start index.
"""

from __future__ import annotations

import math
import multiprocessing
import os
import re
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .homotopy import (
    NotSquareError,
    ZeroDegreePolynomialError,
    make_homotopy,
    total_degree_start,
)
from .linalg import ComplexVector
from .poly import Coeff, DimensionMismatchError, Polynomial, PolySystem, degrees
from .rng import SplitMix64
from .tracker import (
    PathResult,
    PathStatus,
    SolutionRecord,
    TrackerConfig,
    default_config,
    track_batch,
)
from .xnum import DomainError, Precision

DEDUPE_TOL = 1e-8


@dataclass(frozen=True)
class SolverOptions:
    tasks: int = 0  # 0 = in-process sequential; N >= 1 = worker processes
    precision: Precision = Precision.D
    seed: int = 20240521
    tracker: Optional[TrackerConfig] = None
    verbose: bool = False
    checkin: bool = True

    def __post_init__(self):
        if self.tasks < 0:
            raise ValueError("tasks must be >= 0")

    def tracker_config(self) -> TrackerConfig:
        return self.tracker if self.tracker is not None else default_config(self.precision)


@dataclass(frozen=True)
class SolveReport:
    solutions: Tuple[SolutionRecord, ...]
    path_results: Tuple[PathResult, ...]
    counts: Dict[str, int]
    elapsed_seconds: float
    seed: int
    options: SolverOptions
    varnames: Tuple[str, ...]

    @property
    def total_paths(self) -> int:
        return len(self.path_results)


# ---------------------------------------------------------------------------
# parallel tracking
# ---------------------------------------------------------------------------

_WORKER = {}


def _worker_init(h, cfg, precision):
    _WORKER["h"] = h
    _WORKER["cfg"] = cfg
    _WORKER["precision"] = precision


def _worker_track(payload):
    indices, pts = payload
    results = track_batch(
        _WORKER["h"], pts, _WORKER["cfg"], _WORKER["precision"], indices
    )
    return results


def _track_all(h, points, cfg, precision, tasks, verbose=False) -> List[PathResult]:
    total = len(points)
    if tasks == 0 or total == 0:
        return track_batch(h, points, cfg, precision, list(range(total)))
    # dynamic queue of index chunks; chunk size balances ufunc batching
    # against load balance (path costs vary wildly)
    chunk = max(16, min(256, math.ceil(total / (4 * tasks))))
    jobs = []
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        jobs.append((list(range(lo, hi)), points[lo:hi]))
    slots: List[Optional[PathResult]] = [None] * total
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(tasks, initializer=_worker_init, initargs=(h, cfg, precision)) as pool:
        for results in pool.imap_unordered(_worker_track, jobs):
            for r in results:
                slots[r.start_index] = r
            if verbose:
                done = sum(s is not None for s in slots)
                print(f"tracked {done}/{total} paths", flush=True)
    return [s for s in slots if s is not None]


# ---------------------------------------------------------------------------
# postprocessing
# ---------------------------------------------------------------------------


def _cluster_indices(points: List[np.ndarray], tol: float) -> List[int]:
    """Union-find cluster id per point under the ∞-norm, processed in order."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if n:
        arr = np.stack(points)
        block = 512
        for i in range(n):
            ri = find(i)
            for lo in range(i + 1, n, block):
                hi = min(lo + block, n)
                d = np.max(np.abs(arr[lo:hi] - arr[i]), axis=1)
                for j in np.nonzero(d <= tol)[0]:
                    rj = find(lo + int(j))
                    if rj != ri:
                        parent[max(ri, rj)] = min(ri, rj)
                        ri = min(ri, rj)
    return [find(i) for i in range(n)]


def dedupe(solutions: Sequence[SolutionRecord], tol: float = DEDUPE_TOL) -> List[SolutionRecord]:
    """Cluster solutions within tol (∞-norm); keep the lowest-err member of
    each cluster and stamp it with the cluster size as multiplicity."""
    recs = list(solutions)
    if not recs:
        return []
    pts = [r.coords.to_complex() for r in recs]
    cluster = _cluster_indices(pts, tol)
    groups: Dict[int, List[int]] = {}
    for k, c in enumerate(cluster):
        groups.setdefault(c, []).append(k)
    out = []
    for c in sorted(groups, key=lambda c: groups[c][0]):
        members = groups[c]
        best = min(members, key=lambda k: (recs[k].err, k))
        out.append(replace(recs[best], m=len(members)))
    return out


def _is_real_point(z: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(z))) if z.size else 1.0)
    return bool(np.all(np.abs(z.imag) <= 1e-8 * scale))


def solve_blackbox(s: PolySystem, opts: SolverOptions = SolverOptions()) -> SolveReport:
    """Solve a square system: homotopy, track all paths, dedupe, report."""
    if opts.checkin:
        if not s.is_square():
            raise NotSquareError(
                f"system has {s.neq} equations in {s.nvars} variables"
            )
        bad = [i + 1 for i, d in enumerate(degrees(s)) if d < 1]
        if bad:
            raise ZeroDegreePolynomialError(
                f"equations {bad} have degree < 1; every equation must move"
            )
    t0 = time.perf_counter()
    rng = SplitMix64(opts.seed)
    start_sys, starts = total_degree_start(s, rng)
    h = make_homotopy(s, start_sys, rng)
    cfg = opts.tracker_config()
    results = _track_all(h, list(starts.points), cfg, opts.precision, opts.tasks, opts.verbose)
    results.sort(key=lambda r: r.start_index)

    converged = [r for r in results if r.status is PathStatus.CONVERGED]
    diverged = sum(r.status is PathStatus.DIVERGED for r in results)
    failed = sum(
        r.status in (PathStatus.CORRECTOR_FAILED, PathStatus.MAX_STEPS) for r in results
    )
    reps = dedupe([r.endpoint for r in converged], DEDUPE_TOL)
    sols = []
    for rec in reps:
        z = rec.coords.to_complex()
        sols.append(replace(rec, is_real=_is_real_point(z), singular=rec.rco < 1e-8))
    counts = {
        "converged": len(sols),
        "clustered": len(converged) - len(sols),
        "diverged": diverged,
        "failed": failed,
    }
    elapsed = time.perf_counter() - t0
    return SolveReport(
        solutions=tuple(sols),
        path_results=tuple(results),
        counts=counts,
        elapsed_seconds=elapsed,
        seed=opts.seed,
        options=opts,
        varnames=s.varnames,
    )


# ---------------------------------------------------------------------------
# solution strings
# ---------------------------------------------------------------------------


def format_solution(sol: SolutionRecord, names: Sequence[str], index: int = 1) -> str:
    """Render one solution in the fixed diagnostic block layout."""
    if len(names) != len(sol.coords):
        raise DimensionMismatchError(
            f"{len(names)} names for {len(sol.coords)} coordinates"
        )
    z = sol.coords.to_complex()
    lines = [
        f"solution {index} :",
        f"t : {sol.t: .16E}  {0.0: .16E}",
        f"m : {sol.m}",
        "the solution for t :",
    ]
    for name, val in zip(names, z):
        lines.append(f" {name} : {val.real: .15E}  {val.imag: .15E}")
    lines.append(
        f"== err : {sol.err: .3E} = rco : {sol.rco: .3E} = res : {sol.res: .3E} ="
    )
    return "\n".join(lines)


def format_solutions(report: SolveReport) -> str:
    blocks = [
        format_solution(sol, report.varnames, k + 1)
        for k, sol in enumerate(report.solutions)
    ]
    return "\n".join(blocks) + ("\n" if blocks else "")


_SOL_HEAD_RE = re.compile(r"^solution\s+(\d+)\s*:\s*$")
_SOL_T_RE = re.compile(r"^t\s*:\s*(\S+)\s+(\S+)\s*$")
_SOL_M_RE = re.compile(r"^m\s*:\s*(\d+)\s*$")
_SOL_COORD_RE = re.compile(r"^\s*([A-Za-z][A-Za-z0-9_]*)\s*:\s*(\S+)\s+(\S+)\s*$")
_SOL_DIAG_RE = re.compile(
    r"^==\s*err\s*:\s*(\S+)\s*=\s*rco\s*:\s*(\S+)\s*=\s*res\s*:\s*(\S+)\s*=\s*$"
)


def parse_solution_string(text: str) -> Dict[str, complex]:
    """Read one formatted solution block back into a map.

    Coordinate values appear under their variable names; diagnostics under
    "t", "m", "err", "rco", "res".  Inverse of format_solution up to the
    printed digits.
    """
    out: Dict[str, complex] = {}
    seen_coords = False
    for raw in text.splitlines():
        line = raw.rstrip()
        if not line or _SOL_HEAD_RE.match(line):
            continue
        m = _SOL_T_RE.match(line)
        if m and "t" not in out:
            out["t"] = complex(float(m.group(1)), float(m.group(2)))
            continue
        m = _SOL_M_RE.match(line)
        if m:
            out["m"] = complex(int(m.group(1)))
            continue
        if line.strip() == "the solution for t :":
            seen_coords = True
            continue
        m = _SOL_DIAG_RE.match(line)
        if m:
            out["err"] = complex(float(m.group(1)))
            out["rco"] = complex(float(m.group(2)))
            out["res"] = complex(float(m.group(3)))
            continue
        m = _SOL_COORD_RE.match(line)
        if m and seen_coords:
            out[m.group(1)] = complex(float(m.group(2)), float(m.group(3)))
            continue
        raise ValueError(f"unrecognized solution line: {line!r}")
    return out


def solution_to_map(sol: SolutionRecord, names: Sequence[str]) -> Dict[str, complex]:
    """Map variable names to coordinate values plus the diagnostic fields."""
    if len(names) != len(sol.coords):
        raise DimensionMismatchError(
            f"{len(names)} names for {len(sol.coords)} coordinates"
        )
    z = sol.coords.to_complex()
    out: Dict[str, complex] = {name: complex(val) for name, val in zip(names, z)}
    out["t"] = complex(sol.t)
    out["m"] = complex(sol.m)
    out["err"] = complex(sol.err)
    out["rco"] = complex(sol.rco)
    out["res"] = complex(sol.res)
    return out


# ---------------------------------------------------------------------------
# the cyclic n-roots family
# ---------------------------------------------------------------------------


def families_cyclic(n: int) -> PolySystem:
    """Cyclic n-roots: k-fold consecutive products summed cyclically for
    k = 1..n-1, and the full product pinned to 1."""
    if n < 2:
        raise DomainError("cyclic n-roots needs n >= 2")
    names = tuple(f"x{i}" for i in range(n))
    one = Coeff.from_fractions(Fraction(1))
    polys = []
    for k in range(1, n):
        terms: Dict[tuple, Coeff] = {}
        for i in range(n):
            e = [0] * n
            for j in range(i, i + k):
                e[j % n] += 1
            key = tuple(e)
            prev = terms.get(key)
            terms[key] = one if prev is None else Coeff.from_fractions(
                prev.to_fractions()[0] + 1
            )
        polys.append(Polynomial.from_dict(terms, n))
    polys.append(
        Polynomial.from_dict(
            {
                tuple([1] * n): one,
                tuple([0] * n): Coeff.from_fractions(Fraction(-1)),
            },
            n,
        )
    )
    return PolySystem(tuple(polys), names)


# ---------------------------------------------------------------------------
# quality-up benchmark
# ---------------------------------------------------------------------------


def qualityup(n_tasks: int, precision: Precision, seed: int = 7) -> float:
    """Solve cyclic(7) at the given worker count and precision; return the
    wall-clock seconds."""
    s = families_cyclic(7)
    opts = SolverOptions(tasks=n_tasks, precision=precision, seed=seed)
    return solve_blackbox(s, opts).elapsed_seconds


def bench_cyclic(
    n: int,
    tasks_list: Sequence[int],
    precisions: Sequence[Precision],
    seed: int = 7,
) -> Dict[str, object]:
    """Elapsed-time grid over (tasks, precision) for cyclic(n).

    Returns {"system", "tasks", "precisions", "elapsed", "overhead"}, where
    elapsed[i][j] is seconds at tasks_list[i] and precisions[j], and the
    overhead factors normalize single-task times against double precision.
    """
    s = families_cyclic(n)
    elapsed = []
    for tasks in tasks_list:
        row = []
        for prec in precisions:
            opts = SolverOptions(tasks=tasks, precision=prec, seed=seed)
            row.append(solve_blackbox(s, opts).elapsed_seconds)
        elapsed.append(row)
    base = None
    if 1 in tasks_list and Precision.D in precisions:
        base = elapsed[list(tasks_list).index(1)][list(precisions).index(Precision.D)]
    overhead = None
    if base:
        row1 = elapsed[list(tasks_list).index(1)]
        overhead = [v / base for v in row1]
    return {
        "system": f"cyclic{n}",
        "tasks": list(tasks_list),
        "precisions": [p.value for p in precisions],
        "elapsed": elapsed,
        "overhead": overhead,
    }


def bench_to_csv(bench: Dict[str, object]) -> str:
    """Rows = task counts, columns = precisions, final overhead-factor row."""
    cols = ",".join(bench["precisions"])
    lines = [f"tasks,{cols}"]
    for tasks, row in zip(bench["tasks"], bench["elapsed"]):
        lines.append(",".join([str(tasks)] + [f"{v:.3f}" for v in row]))
    if bench["overhead"] is not None:
        lines.append(
            ",".join(["overhead_factor"] + [f"{v:.2f}" for v in bench["overhead"]])
        )
    return "\n".join(lines) + "\n"
