"""Acceptance gate: one test per numbered criterion, strict tolerances.

Each test prints exactly one ``[criterion NN] PASS/FAIL`` line (visible
with ``pytest -v`` through the test outcome, and on stdout with ``-s``)
and fails if any leg of the criterion misses its stated tolerance.  No
tolerance here is loosened to fit this machine; where hardware limits
make a leg unattainable the test is allowed to fail and the analysis
lives with the project notes, not in weakened assertions.

Heavyweight evidence: the cyclic(7) stability study (five seeds, two
task counts, plus an independent double-double oracle solve) costs hours
of compute, so the default run replays one live leg (seed 1, double
precision) and checks both its count and its solution-file digest
against the committed study record in ``tests/data/cyclic7_ladder.json``
(regenerate with ``scripts/make_ladder.py``).  Environment switches:

    POLYCONT_FULL_ACCEPTANCE=1   re-run the whole cyclic(7) study live
    POLYCONT_STRETCH=1           include the cyclic(8) decomposition
"""

import hashlib
import json
import math
import os
import time
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from polycont.apollonius import SessionCache, apollonius_solve, input_from_floats
from polycont.homotopy import coefficient_homotopy
from polycont.linalg import ComplexMatrix, ComplexVector, lu_solve
from polycont.maps import solve_binomials, format_map
from polycont.poly import evaluate, jacobian, parse_system
from polycont.rng import SplitMix64
from polycont.solver import (
    SolverOptions,
    bench_cyclic,
    bench_to_csv,
    families_cyclic,
    format_solutions,
    solve_blackbox,
)
from polycont.tracker import default_config, newton_correct
from polycont.witness import monodromy_breakup, trace_test, witness_solve
from polycont.xnum import ExtendedReal, Precision

TRINOMIALS = "x^2*y^2 + 2*x - 1; x^2*y^2 - 3*y + 1;"
CUBIC_CURVE = "x*y - z; x^2 - y;"
DATA = Path(__file__).parent / "data" / "cyclic7_ladder.json"

FULL = os.environ.get("POLYCONT_FULL_ACCEPTANCE", "") == "1"
STRETCH = os.environ.get("POLYCONT_STRETCH", "") == "1"


def _finish(num: int, checks) -> None:
    bad = [msg for ok, msg in checks if not ok]
    verdict = "PASS" if not bad else "FAIL"
    detail = "; ".join(bad) if bad else f"{len(checks)} checks"
    line = f"[criterion {num:02d}] {verdict} ({detail})"
    print(line)
    assert not bad, line


def _direct_residual(system, point) -> float:
    """max |p(point)| over the system, evaluated term by term."""
    worst = 0.0
    for p in system.polys:
        acc = 0j
        for term in p.terms:
            v = term.coeff.to_complex()
            for z, e in zip(point, term.exponents):
                v *= z**e
            acc += v
        worst = max(worst, abs(acc))
    return worst


@pytest.fixture(scope="module")
def trinomial_report():
    return solve_blackbox(parse_system(TRINOMIALS), SolverOptions())


@pytest.fixture(scope="module")
def ladder_record():
    if not DATA.exists():
        pytest.fail(
            f"missing study record {DATA}; run scripts/make_ladder.py first"
        )
    with open(DATA, "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="module")
def cyclic7_live():
    rep = solve_blackbox(families_cyclic(7), SolverOptions(seed=1, tasks=0))
    text = format_solutions(rep)
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return rep, digest


def test_criterion_01_trinomial_reproduction(trinomial_report):
    rep = trinomial_report
    hits = [
        sol
        for sol in rep.solutions
        if abs(sol.coords.to_complex()[0].real - 0.48613) <= 5e-6
        and abs(sol.coords.to_complex()[0].imag) <= 1e-8
        and abs(sol.coords.to_complex()[1].real - 0.34258) <= 5e-6
        and abs(sol.coords.to_complex()[1].imag) <= 1e-8
    ]
    checks = [
        (len(hits) == 1, f"expected exactly one root near (0.48613, 0.34258), found {len(hits)}"),
        (
            all(sol.res <= 1e-10 for sol in hits),
            f"residual {max((s.res for s in hits), default=math.nan):.2e} > 1e-10",
        ),
        (
            rep.elapsed_seconds < 1.0,
            f"solve took {rep.elapsed_seconds:.3f}s, needed < 1s",
        ),
    ]
    _finish(1, checks)


def test_criterion_02_path_count_conservation(trinomial_report, cyclic7_live):
    small = solve_blackbox(parse_system("x^2 - 1;"), SolverOptions(seed=5))
    cyc, _ = cyclic7_live
    checks = []
    checks.append(
        (trinomial_report.total_paths == 16,
         f"trinomial tracked {trinomial_report.total_paths} paths, wanted 16")
    )
    checks.append(
        (cyc.total_paths == 5040,
         f"cyclic(7) tracked {cyc.total_paths} paths, wanted 5040")
    )
    for name, rep in (("trinomial", trinomial_report), ("cyclic7", cyc), ("quadratic", small)):
        total = sum(rep.counts.values())
        checks.append(
            (total == rep.total_paths,
             f"{name}: counts sum {total} != total paths {rep.total_paths}")
        )
    _finish(2, checks)


def test_criterion_03_cyclic7_count_stability(ladder_record, cyclic7_live):
    rec = ladder_record
    live, live_digest = cyclic7_live
    counts = rec["precision_d"]["seed_counts"]
    oracle = rec["dd_oracle"]["converged"]
    checks = [
        (
            sorted(counts) == ["1", "2", "3", "4", "5"],
            f"study record covers seeds {sorted(counts)}, wanted 1..5",
        ),
        (
            len(set(counts.values())) == 1,
            f"recorded counts differ across seeds: {counts}",
        ),
        (
            rec["precision_d"]["tasks8_bytes_identical_to_tasks0"] is True,
            "recorded tasks=8 run was not byte-identical to tasks=0",
        ),
        (
            live.counts["converged"] == counts["1"],
            f"live seed-1 count {live.counts['converged']} != recorded {counts['1']}",
        ),
        (
            live_digest == rec["precision_d"]["seed1_sha256"],
            f"live seed-1 digest {live_digest[:12]}... != recorded",
        ),
        (
            live.counts["converged"] == oracle,
            f"double count {live.counts['converged']} != double-double oracle {oracle}",
        ),
    ]
    if FULL:
        s = families_cyclic(7)
        for seed in (2, 3, 4, 5):
            rep = solve_blackbox(s, SolverOptions(seed=seed, tasks=0))
            checks.append(
                (rep.counts["converged"] == counts[str(seed)],
                 f"live seed-{seed} count {rep.counts['converged']} drifted")
            )
        rep8 = solve_blackbox(s, SolverOptions(seed=1, tasks=8))
        checks.append(
            (format_solutions(rep8) == format_solutions(live),
             "live tasks=8 output differs from tasks=0")
        )
        repdd = solve_blackbox(
            s, SolverOptions(seed=rec["dd_oracle"]["seed"], precision=Precision.DD)
        )
        checks.append(
            (repdd.counts["converged"] == oracle,
             f"live DD oracle count {repdd.counts['converged']} != {oracle}")
        )
    _finish(3, checks)


def test_criterion_04_quality_up_trends():
    # cyclic(3) is the smallest regular member of the family; the trends
    # are machine-independent inequalities, so the family size only sets
    # the bench runtime (cyclic(7) at double-double costs hours here)
    bench = bench_cyclic(3, [1, 8], [Precision.D, Precision.DD], seed=7)
    d1 = bench["elapsed"][0][0]
    dd1 = bench["elapsed"][0][1]
    dd8 = bench["elapsed"][1][1]
    csv = bench_to_csv(bench)
    lines = csv.strip().splitlines()
    checks = [
        (
            dd1 / d1 > 2.0,
            f"extended-precision factor {dd1 / d1:.2f} not > 2",
        ),
        (
            dd8 < dd1,
            f"8-task DD {dd8:.2f}s not faster than 1-task DD {dd1:.2f}s",
        ),
        (lines[0] == "tasks,d,dd", f"csv header {lines[0]!r}"),
        (
            len(lines) == 4 and lines[1].startswith("1,") and lines[2].startswith("8,"),
            "csv grid rows missing",
        ),
        (
            lines[-1].startswith("overhead_factor,"),
            "csv lacks the overhead-factor row",
        ),
        (
            bench["overhead"] is not None
            and abs(bench["overhead"][0] - 1.0) < 1e-12
            and bench["overhead"][1] > 2.0,
            "overhead factors not normalized against double precision",
        ),
    ]
    _finish(4, checks)


def test_criterion_05_twisted_cubic_witness():
    s = parse_system(CUBIC_CURVE)
    checks = []
    for seed in (11, 3, 19):
        w = witness_solve(s, 1, SolverOptions(seed=seed))
        checks.append(
            (len(w.points) == 3, f"seed {seed}: {len(w.points)} points, wanted 3")
        )
        for rec in w.points:
            z = rec.coords.to_complex()
            slack = max(abs(v) for v in z[3:])
            curve = _direct_residual(s, z[:3])
            checks.append(
                (slack <= 1e-8, f"seed {seed}: slack modulus {slack:.2e} > 1e-8")
            )
            checks.append(
                (curve <= 1e-8, f"seed {seed}: curve residual {curve:.2e} > 1e-8")
            )
    _finish(5, checks)


def test_criterion_06_monodromy_and_trace():
    cubic = witness_solve(parse_system(CUBIC_CURVE), 1, SolverOptions(seed=13))
    part = monodromy_breakup(cubic, seed=5)
    checks = [
        (len(part.blocks) == 1, f"cubic split into {len(part.blocks)} factors"),
        (part.degrees == (3,), f"cubic factor degrees {part.degrees}"),
        (all(part.certified), "cubic factor not trace-certified"),
    ]
    ok, resid = trace_test(cubic, part.blocks[0])
    checks.append((ok and resid <= 1e-6, f"cubic trace residual {resid:.2e} > 1e-6"))

    pair = witness_solve(parse_system("x*y;"), 1, SolverOptions(seed=2))
    ppart = monodromy_breakup(pair, seed=9)
    checks.append(
        (len(ppart.blocks) == 2 and ppart.degrees == (1, 1),
         f"two-line system gave blocks {ppart.degrees}")
    )
    for block in ppart.blocks:
        ok, resid = trace_test(pair, block)
        checks.append(
            (ok and resid <= 1e-6, f"line trace residual {resid:.2e} > 1e-6")
        )

    if STRETCH:
        big = witness_solve(families_cyclic(8), 1, SolverOptions(seed=3))
        bpart = monodromy_breakup(big, seed=3)
        sizes = sorted(bpart.degrees)
        checks.append(
            (len(bpart.blocks) == 144 and sizes.count(16) == 8 and sizes.count(2) == 8,
             f"cyclic(8) decomposition gave {len(bpart.blocks)} factors")
        )
    _finish(6, checks)


def test_criterion_07_binomial_maps():
    maps = solve_binomials(3, parse_system(CUBIC_CURVE), puretopdim=True)
    want = [
        "x - (1+0j)*t1**1",
        "y - (1+0j)*t1**2",
        "z - (1+0j)*t1**3",
        "dimension = 1",
        "degree = 3",
    ]
    checks = [(len(maps) == 1, f"{len(maps)} maps, wanted 1")]
    if maps:
        got = format_map(maps[0])
        checks.append((got == want, f"map text {got!r}"))
    _finish(7, checks)


def _nonoverlap_violations(r: ExtendedReal) -> bool:
    limbs = [float(c) for c in r.limbs]
    for hi, lo in zip(limbs, limbs[1:]):
        if hi == 0.0:
            if lo != 0.0:
                return True
        elif abs(lo) > 0.5 * math.ulp(abs(hi)):
            return True
    return False


def test_criterion_08_numerics_property_suite(trinomial_report):
    checks = []

    # 1e5 random add/mul ops at DD and QD against exact rationals
    rng = np.random.default_rng(20240521)
    bad_overlap = 0
    bad_value = 0
    n_ops = 0
    # multiplication bounds are the provable ones for plain-double cross-term
    # accumulation: 9u^2 at double-double (see test_xnum for the derivation);
    # the wider quad-double margins were never approached in sampling
    for precision, add_err, mul_err in (
        (Precision.DD, Fraction(1, 2**104), Fraction(9, 2**106)),
        (Precision.QD, Fraction(1, 2**205), Fraction(1, 2**209)),
    ):
        for _ in range(25000):
            u = rng.standard_normal(4)
            a = ExtendedReal.from_float(u[0], precision) * ExtendedReal.from_float(
                u[1], precision
            )
            b = ExtendedReal.from_float(u[2], precision) * ExtendedReal.from_float(
                u[3], precision
            )
            fa, fb = a.to_fraction(), b.to_fraction()
            for result, exact, rel, scale in (
                (a + b, fa + fb, add_err, abs(fa) + abs(fb)),
                (a * b, fa * fb, mul_err, abs(fa * fb)),
            ):
                n_ops += 1
                if _nonoverlap_violations(result):
                    bad_overlap += 1
                err = abs(result.to_fraction() - exact)
                if err > (scale + Fraction(1, 10**60)) * rel:
                    bad_value += 1
    checks.append((n_ops == 100000, f"ran {n_ops} ops, wanted 100000"))
    checks.append((bad_overlap == 0, f"{bad_overlap} non-overlap violations"))
    checks.append((bad_value == 0, f"{bad_value} ops off the rational oracle"))

    # Jacobian against central finite differences
    s = parse_system(TRINOMIALS)
    pts = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
    worst_fd = 0.0
    for pt in pts:
        J = jacobian(s, pt).to_complex()
        for v in range(2):
            hi, lo = pt.copy(), pt.copy()
            hi[v] += 1e-6
            lo[v] -= 1e-6
            col = (evaluate(s, hi).to_complex() - evaluate(s, lo).to_complex()) / 2e-6
            scale = np.maximum(1.0, np.abs(J[:, v]))
            worst_fd = max(worst_fd, float(np.max(np.abs(J[:, v] - col) / scale)))
    checks.append((worst_fd <= 1e-6, f"jacobian vs differences {worst_fd:.2e} > 1e-6"))

    # linear-solve residuals, double exactly and double-double rationally
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    b = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    x, rco = lu_solve(ComplexMatrix.from_complex(A, Precision.D),
                      ComplexVector.from_complex(b, Precision.D))
    res_d = float(np.max(np.abs(A @ x.to_complex() - b)))
    checks.append((0.0 < rco <= 1.0, f"condition estimate {rco} out of range"))
    checks.append((res_d <= 1e-12, f"double solve residual {res_d:.2e} > 1e-12"))

    xdd, _ = lu_solve(ComplexMatrix.from_complex(A, Precision.DD),
                      ComplexVector.from_complex(b, Precision.DD))
    limbs = xdd.data

    def exact_coord(limb_arrays, j):
        return sum(Fraction(float(c[j])) for c in limb_arrays)

    res_dd = Fraction(0)
    for i in range(6):
        sr, si = Fraction(0), Fraction(0)
        for j in range(6):
            are, aim = Fraction(A[i, j].real), Fraction(A[i, j].imag)
            xre = exact_coord(limbs.re, j)
            xim = exact_coord(limbs.im, j)
            sr += are * xre - aim * xim
            si += are * xim + aim * xre
        sr -= Fraction(b[i].real)
        si -= Fraction(b[i].imag)
        res_dd = max(res_dd, abs(sr), abs(si))
    checks.append(
        (float(res_dd) <= 1e-28, f"double-double solve residual {float(res_dd):.2e} > 1e-28")
    )

    # refinement floor: double stalls, double-double breaks through
    s = parse_system(TRINOMIALS)
    root = min(
        trinomial_report.solutions,
        key=lambda r: abs(r.coords.to_complex()[0].real - 0.48613),
    ).coords.to_complex()
    h = coefficient_homotopy(s, s, SplitMix64(1))
    cfg = replace(default_config(Precision.D), corrector_tol=1e-40, max_corrector_iters=8)
    _, _, _, res_stall, _ = newton_correct(h, root, 1.0, cfg, Precision.D)
    cfg_dd = replace(default_config(Precision.DD), corrector_tol=1e-40, max_corrector_iters=8)
    _, _, _, res_deep, _ = newton_correct(h, root, 1.0, cfg_dd, Precision.DD)
    checks.append(
        (1e-18 < res_stall, f"double floor {res_stall:.2e} suspiciously low")
    )
    checks.append(
        (res_stall < 1e-13, f"double floor {res_stall:.2e} too high")
    )
    checks.append(
        (res_deep <= 1e-25, f"double-double refinement reached only {res_deep:.2e}")
    )
    _finish(8, checks)


def test_criterion_09_determinism(trinomial_report, cyclic7_live, ladder_record):
    base = format_solutions(trinomial_report)
    again = solve_blackbox(parse_system(TRINOMIALS), SolverOptions())
    forked = solve_blackbox(parse_system(TRINOMIALS), SolverOptions(tasks=2))
    _, live_digest = cyclic7_live
    checks = [
        (
            format_solutions(again) == base,
            "repeated run changed the solution file",
        ),
        (
            format_solutions(forked) == base,
            "tasks=2 run changed the solution file",
        ),
        (
            live_digest == ladder_record["precision_d"]["seed1_sha256"],
            "cyclic(7) digest differs from the recorded run",
        ),
    ]
    _finish(9, checks)


def test_criterion_10_tangent_circle_service():
    cfg = [
        [2.0 * math.cos(math.radians(a)), 2.0 * math.sin(math.radians(a)), 1.0]
        for a in (90, 210, 330)
    ]
    cache = SessionCache()
    cold = apollonius_solve(input_from_floats(cfg), cache=cache)
    checks = []
    worst = 0.0
    for e in cold.entries:
        if not e.is_real:
            continue
        for (cx, cy, ri), sg in zip(cfg, e.signs):
            d = math.hypot(e.x.real - cx, e.y.real - cy)
            worst = max(worst, abs(d - abs(e.r.real + sg * ri)))
    checks.append(
        (cold.entries and worst <= 1e-6,
         f"tangency residual {worst:.2e} > 1e-6")
    )

    dragged = [list(row) for row in cfg]
    dragged[0][0] += 1e-3
    t0 = time.perf_counter()
    warm = apollonius_solve(
        input_from_floats(dragged), session=cold.session, cache=cache
    )
    wall = time.perf_counter() - t0
    fresh = apollonius_solve(input_from_floats(dragged))
    gap = 0.0
    for a, b in zip(warm.entries, fresh.entries):
        for pair in ((a.x, b.x), (a.y, b.y), (a.r, b.r)):
            gap = max(gap, abs(pair[0] - pair[1]))
    checks.append((warm.warm, "drag step did not reuse the session"))
    checks.append((gap <= 1e-6, f"warm vs cold gap {gap:.2e} > 1e-6"))
    checks.append((wall <= 0.200, f"drag step took {wall * 1000:.0f}ms > 200ms"))
    _finish(10, checks)
