"""JSON-friendly dict views of solver reports and tangent-circle output.

Conventions (schema version "v1"): complex numbers are {"re": float,
"im": float} objects; non-finite diagnostics become null so the output
is strict JSON; when tracking ran above double precision, each solution
additionally carries its full-precision text block, since doubles
cannot carry ~32 significant digits.
"""

from __future__ import annotations

import math
from typing import Dict, Optional

from .apollonius import ApolloniusOutput
from .solver import SolveReport, format_solution
from .xnum import Precision

SCHEMA_VERSION = "v1"


def cnum(z: complex) -> Dict[str, float]:
    return {"re": float(z.real), "im": float(z.imag)}


def fnum(v: float) -> Optional[float]:
    v = float(v)
    return v if math.isfinite(v) else None


def report_to_dict(report: SolveReport) -> dict:
    """The /api/solve response body (also the CLI --json payload)."""
    include_text = report.options.precision is not Precision.D
    sols = []
    for k, sol in enumerate(report.solutions):
        z = sol.coords.to_complex()
        entry = {
            "coords": {
                name: cnum(val) for name, val in zip(report.varnames, z)
            },
            "t": fnum(sol.t),
            "m": int(sol.m),
            "err": fnum(sol.err),
            "rco": fnum(sol.rco),
            "res": fnum(sol.res),
            "is_real": bool(sol.is_real),
            "singular": bool(sol.singular),
        }
        if include_text:
            entry["text"] = format_solution(sol, report.varnames, k + 1)
        sols.append(entry)
    return {
        "version": SCHEMA_VERSION,
        "varnames": list(report.varnames),
        "path_count": report.total_paths,
        "counts": dict(report.counts),
        "elapsed_seconds": float(report.elapsed_seconds),
        "seed": int(report.seed),
        "precision": report.options.precision.value,
        "solutions": sols,
    }


def apollonius_to_dict(out: ApolloniusOutput) -> dict:
    """The /api/apollonius response body."""
    entries = []
    for e in out.entries:
        entries.append(
            {
                "signs": list(e.signs),
                "status": e.status,
                "x": cnum(e.x),
                "y": cnum(e.y),
                "r": cnum(e.r),
                "is_real": bool(e.is_real),
                "singular": bool(e.singular),
                "err": fnum(e.err),
                "rco": fnum(e.rco),
                "res": fnum(e.res),
            }
        )
    return {
        "version": SCHEMA_VERSION,
        "session": out.session,
        "elapsed_ms": float(out.elapsed_ms),
        "warm": bool(out.warm),
        "entries": entries,
    }
