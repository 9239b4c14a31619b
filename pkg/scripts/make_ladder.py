#!/usr/bin/env python3
"""Regenerate the cyclic(7) stability record used by the acceptance gate.

Runs the full study live: double-precision solves for seeds 1..5 with
tasks=0, a tasks=8 repeat of seed 1 (byte-compared against tasks=0), and
one independent double-double solve as the count oracle.  Expect roughly
15 minutes for the double-precision legs and several hours for the
double-double oracle on a small machine; progress is printed per leg.

Writes tests/data/cyclic7_ladder.json relative to the repository root.
"""

import argparse
import hashlib
import json
import os
import time
from pathlib import Path

from polycont.solver import (
    SolverOptions,
    families_cyclic,
    format_solutions,
    solve_blackbox,
)
from polycont.xnum import Precision


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=str(
            Path(__file__).resolve().parent.parent
            / "tests" / "data" / "cyclic7_ladder.json"
        ),
    )
    parser.add_argument("--dd-seed", type=int, default=101)
    args = parser.parse_args()

    s = families_cyclic(7)
    seed_counts = {}
    elapsed = {}
    seed1_text = None
    for seed in (1, 2, 3, 4, 5):
        t0 = time.perf_counter()
        rep = solve_blackbox(s, SolverOptions(seed=seed, tasks=0))
        dt = time.perf_counter() - t0
        seed_counts[str(seed)] = rep.counts["converged"]
        elapsed[str(seed)] = round(dt, 1)
        if seed == 1:
            seed1_text = format_solutions(rep)
        print(f"d seed={seed}: {dt:.1f}s counts={rep.counts}", flush=True)

    t0 = time.perf_counter()
    rep8 = solve_blackbox(s, SolverOptions(seed=1, tasks=8))
    same = format_solutions(rep8) == seed1_text
    print(
        f"d seed=1 tasks=8: {time.perf_counter() - t0:.1f}s "
        f"byte-identical={same}",
        flush=True,
    )

    t0 = time.perf_counter()
    repdd = solve_blackbox(
        s, SolverOptions(seed=args.dd_seed, tasks=0, precision=Precision.DD)
    )
    dd_dt = time.perf_counter() - t0
    print(f"dd seed={args.dd_seed}: {dd_dt:.1f}s counts={repdd.counts}", flush=True)

    record = {
        "system": "cyclic7",
        "precision_d": {
            "seed_counts": seed_counts,
            "total_paths": rep8.total_paths,
            "seed1_sha256": hashlib.sha256(seed1_text.encode("utf-8")).hexdigest(),
            "tasks8_bytes_identical_to_tasks0": same,
            "elapsed_seconds": elapsed,
        },
        "dd_oracle": {
            "seed": args.dd_seed,
            "converged": repdd.counts["converged"],
            "elapsed_seconds": round(dd_dt, 1),
        },
        "host": {"cpus": os.cpu_count()},
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
