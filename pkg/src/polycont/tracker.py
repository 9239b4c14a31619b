"""Predictor-corrector path tracking with adaptive steps.

Paths are tracked in blocks: the working state is a (B, n) array of path
points plus per-path scalars (t, step size, status, diagnostics), and every
kernel — evaluation, batched LU, Newton updates, step control — acts
row-wise with masks.  Because all underlying operations are elementwise per
row (per-row pivoting, per-element modulus scaling, masked commits), a
path's trajectory is bit-identical no matter which other paths share its
block.  That property is what makes solver output reproducible across
worker counts, and it is tested.

The scheme is an Euler predictor on the tangent (dHdx · dx = −dHdt) with a
full Newton corrector at the predicted parameter value.  The corrector
accepts on a small update norm or on a residual that is zero relative to
the evaluation's own magnitude (backward error) — the latter is what lets
paths cross badly scaled stretches where intermediate terms dwarf the
update tolerance.  Corrector success expands the step; failure shrinks it
and retries from the last accepted point.  Paths end Converged (reached t = 1 and polished), Diverged (norm
blow-up), CorrectorFailed (step underflow — the typical end of a path
heading to infinity or a singular endpoint), or MaxSteps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from .homotopy import Homotopy
from .linalg import (
    ComplexVector,
    SingularMatrixError,
    XCArr,
    c_add,
    c_ldexp,
    c_modulus,
    c_neg,
    c_scale_re,
    lu_factor_batched,
    lu_solve_batched,
    norm1_batched,
    rco_batched,
)
from .xnum import Precision, x_from_float


class SingularJacobianError(SingularMatrixError):
    """dH/dx was numerically singular where a solve was required."""


class PathStatus(Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    MAX_STEPS = "MaxSteps"
    CORRECTOR_FAILED = "CorrectorFailed"


@dataclass(frozen=True)
class TrackerConfig:
    initial_step: float = 0.05
    min_step: float = 1e-8
    max_step: float = 0.2
    corrector_tol: float = 1e-10
    max_corrector_iters: int = 4
    max_steps: int = 2000
    divergence_norm: float = 1e8
    step_expand: float = 1.5
    step_shrink: float = 0.5
    endgame_tol: float = 1e-12

    def __post_init__(self):
        if not (0.0 < self.min_step <= self.initial_step <= self.max_step < 1.0):
            raise ValueError("need 0 < min_step <= initial_step <= max_step < 1")
        if not (self.step_shrink < 1.0 < self.step_expand):
            raise ValueError("need step_shrink < 1 < step_expand")
        if self.max_corrector_iters < 1 or self.max_steps < 1:
            raise ValueError("iteration budgets must be positive")


_CORRECTOR_TOL = {Precision.D: 1e-10, Precision.DD: 1e-24, Precision.QD: 1e-48}
_ENDGAME_TOL = {Precision.D: 1e-12, Precision.DD: 1e-26, Precision.QD: 1e-52}


def default_config(precision: Precision = Precision.D) -> TrackerConfig:
    """Stock configuration; tolerances tighten with the working precision."""
    return TrackerConfig(
        corrector_tol=_CORRECTOR_TOL[precision],
        endgame_tol=_ENDGAME_TOL[precision],
    )


@dataclass(frozen=True)
class SolutionRecord:
    """One endpoint with its diagnostic block."""

    t: float
    m: int
    coords: ComplexVector
    err: float
    rco: float
    res: float
    is_real: bool = False
    singular: bool = False


@dataclass(frozen=True)
class PathResult:
    status: PathStatus
    endpoint: SolutionRecord
    steps_taken: int
    start_index: int


# ---------------------------------------------------------------------------
# batched helpers
# ---------------------------------------------------------------------------


def _merge_rows(old: XCArr, new: XCArr, mask: np.ndarray) -> XCArr:
    """Rows where mask take `new`, others keep `old`."""
    m = mask[:, None]
    return XCArr(
        tuple(np.where(m, a, b) for a, b in zip(new.re, old.re)),
        tuple(np.where(m, a, b) for a, b in zip(new.im, old.im)),
    )


def _scale_rows(v: XCArr, s: np.ndarray) -> XCArr:
    """Multiply each row of a (B, n) array by its real scale factor."""
    return c_scale_re(v, x_from_float(s[:, None], v.limbs))


def _row_norms(v: XCArr) -> np.ndarray:
    """Max modulus per row of a (B, n) array."""
    return np.max(c_modulus(v), axis=-1)


def _equilibrate(jac: XCArr, rhs: XCArr):
    """Scale each Jacobian row (and its rhs entry) by a power of two.

    Puts every row's largest entry in [0.5, 1), exactly (ldexp——no rounding).
    Polynomial Jacobians mix rows of wildly different scales (a linear
    equation next to a degree-d one evaluated at a large point); without
    equilibration both the pivot choice and the singularity threshold are
    dictated by the largest row and healthy O(1) pivots get flagged as
    singular.  Per-row scaling, so batch composition cannot change a row.
    """
    rmax = np.max(jac.abs_hi(), axis=2)
    _, e = np.frexp(rmax)  # rmax = m * 2**e with m in [0.5, 1)
    return c_ldexp(jac, -e[:, :, None]), c_ldexp(rhs, -e)


def _solve_rows(jac: XCArr, rhs: XCArr, eps: float):
    """Row-equilibrated batched solve; returns (solution, singular mask)."""
    js, bs = _equilibrate(jac, rhs)
    lu, perm, bad = lu_factor_batched(js, eps)
    return lu_solve_batched(lu, perm, bs), bad


def _newton_batch(
    h, x: XCArr, tvec, eps, tol, max_iters, active,
    relative=False, bail=False, backward=False,
):
    """Masked batched Newton at frozen per-row parameter values.

    Returns (x, err, done, sing, iters).  Rows stop updating once their
    update norm reaches tol — taken relative to max(1, ‖x‖∞) when
    `relative` — or their Jacobian is flagged singular.  With `backward`, a
    row is also accepted when every |H_i(x)| is below tol times the row's
    evaluation magnitude: the value is zero to working accuracy, and the
    noise-dominated update that Newton would take is discarded rather than
    applied.  Badly scaled stretches (huge intermediate terms, conditioning
    floor above the update tolerance) survive that way.  With `bail`, a row
    whose update is a quarter of its own scale or worse gives up at once:
    quadratic convergence cannot recover the tolerance from that far out in
    the remaining iterations, so the tracker should shrink the step instead
    of paying for them.  Frozen rows are untouched, so results per row do
    not depend on the batch.
    """
    nb = x.shape[0]
    err = np.full(nb, np.inf)
    done = np.zeros(nb, dtype=bool)
    sing = np.zeros(nb, dtype=bool)
    dead = np.zeros(nb, dtype=bool)
    iters = np.zeros(nb, dtype=np.int64)
    prev = np.full(nb, np.inf)
    for _ in range(max_iters):
        need = active & ~done & ~sing & ~dead
        if not need.any():
            break
        hv, jac, _ = h.eval_all_x(x, tvec, want_dt=False)
        delta, bad = _solve_rows(jac, c_neg(hv), eps)
        step = _row_norms(delta)
        sing |= need & bad
        upd = need & ~bad
        if backward:
            mag = h.mag_all(c_modulus(x), tvec)
            at_floor = upd & np.all(c_modulus(hv) <= tol * mag, axis=-1)
            done |= at_floor
            upd = upd & ~at_floor
            err = np.where(at_floor, step, err)
        x = _merge_rows(x, c_add(x, delta), upd)
        err = np.where(upd, step, err)
        iters = np.where(upd, iters + 1, iters)
        scale = np.maximum(1.0, _row_norms(x))
        goal = tol * scale if relative else tol
        done |= upd & (step <= goal) & np.isfinite(step)
        if bail:
            # no quadratic contraction left: update huge, or barely
            # shrinking against the previous one (conditioning floor)
            dead |= upd & ~done & (~(step <= 0.25 * scale) | (step > 0.25 * prev))
        prev = np.where(upd, step, prev)
    return x, err, done, sing, iters


def _residual_rows(h, x: XCArr, tvec) -> np.ndarray:
    hv, _, _ = h.eval_all_x(x, tvec, want_dt=False)
    return _row_norms(hv)


# ---------------------------------------------------------------------------
# batch tracking
# ---------------------------------------------------------------------------

_ACTIVE = -1
_STATUS_ORDER = (
    PathStatus.CONVERGED,
    PathStatus.DIVERGED,
    PathStatus.CORRECTOR_FAILED,
    PathStatus.MAX_STEPS,
)


def track_batch(
    h: Homotopy,
    starts: Sequence[np.ndarray],
    cfg: TrackerConfig,
    precision: Precision = Precision.D,
    start_indices: Optional[Sequence[int]] = None,
) -> List[PathResult]:
    """Track a block of paths from t=0 to t=1; one PathResult per start."""
    limbs = precision.limbs
    eps = precision.eps
    nb = len(starts)
    n = h.nvars
    if nb == 0:
        return []
    orig = np.asarray(
        start_indices if start_indices is not None else np.arange(nb), dtype=np.int64
    )

    x = XCArr.from_complex(np.asarray(list(starts), dtype=np.complex128).reshape(nb, n), limbs)
    t = np.zeros(nb)
    dtn = np.full(nb, cfg.initial_step)
    steps = np.zeros(nb, dtype=np.int64)
    err = np.full(nb, np.inf)
    geo = np.zeros(nb, dtype=bool)
    rows = np.arange(nb)

    # final state per original slot
    fin_x = XCArr.zeros((nb, n), limbs)
    fin_status = np.full(nb, _ACTIVE, dtype=np.int64)
    fin_t = np.zeros(nb)
    fin_err = np.full(nb, np.inf)
    fin_steps = np.zeros(nb, dtype=np.int64)

    def retire(mask: np.ndarray, code: int):
        if not mask.any():
            return
        slots = rows[mask]
        fin_x.put(slots, x[mask])
        fin_status[slots] = code
        fin_t[slots] = t[mask]
        fin_err[slots] = err[mask]
        fin_steps[slots] = steps[mask]

    code_of = {s: k for k, s in enumerate(_STATUS_ORDER)}

    while rows.size:
        # Step choice: normally min(dtn, remaining).  A row whose exact t=1
        # landing failed switches to a geometric approach — never cover
        # more than half the distance remaining, never re-expand the step —
        # and takes one last exact landing once within min_step of 1.  That
        # keeps a path with a singular or escaping endpoint from retrying
        # full-distance landings forever.
        rem = 1.0 - t
        dt = np.where(
            geo & (rem > cfg.min_step),
            np.minimum(dtn, 0.5 * rem),
            np.minimum(dtn, rem),
        )
        t_next = t + dt
        active = np.ones(rows.size, dtype=bool)

        # Euler predictor on the tangent at the current point
        _, jac, ht = h.eval_all_x(x, t, want_dt=True)
        xdot, sing_p = _solve_rows(jac, c_neg(ht), eps)
        x_pred = c_add(x, _scale_rows(xdot, dt))
        x_pred = _merge_rows(x_pred, x, sing_p)  # no usable tangent: hold

        # Newton corrector at the stepped parameter values; success is
        # measured relative to the point's scale so that paths marching off
        # to infinity keep advancing until the divergence check retires them
        x_corr, cerr, cdone, csing, _ = _newton_batch(
            h, x_pred, t_next, eps, cfg.corrector_tol, cfg.max_corrector_iters,
            active, relative=True, bail=True, backward=True,
        )
        ok = cdone & ~sing_p & ~csing

        geo |= (dt == rem) & ~ok
        x = _merge_rows(x, x_corr, ok)
        t = np.where(ok, t_next, t)
        err = np.where(ok, cerr, err)
        grown = np.where(geo, dtn, np.minimum(dtn * cfg.step_expand, cfg.max_step))
        dtn = np.where(ok, grown, dtn * cfg.step_shrink)
        steps += 1

        size = _row_norms(x)
        converged = ok & (t >= 1.0)
        diverged = ~converged & ((size > cfg.divergence_norm) | ~np.isfinite(size))
        min_fail = ~converged & ~diverged & ~ok & (dtn < cfg.min_step)
        exhausted = (
            ~converged & ~diverged & ~min_fail & (steps >= cfg.max_steps)
        )

        retire(converged, code_of[PathStatus.CONVERGED])
        retire(diverged, code_of[PathStatus.DIVERGED])
        retire(min_fail, code_of[PathStatus.CORRECTOR_FAILED])
        retire(exhausted, code_of[PathStatus.MAX_STEPS])

        keep = ~(converged | diverged | min_fail | exhausted)
        if not keep.all():
            x = x[keep]
            t = t[keep]
            dtn = dtn[keep]
            steps = steps[keep]
            err = err[keep]
            geo = geo[keep]
            rows = rows[keep]

    return _finalize(h, cfg, precision, orig, fin_x, fin_status, fin_t, fin_err, fin_steps)


def _finalize(h, cfg, precision, orig, fin_x, fin_status, fin_t, fin_err, fin_steps):
    """Polish converged rows at t=1, attach diagnostics, build PathResults."""
    nb = fin_status.shape[0]
    limbs = precision.limbs
    eps = precision.eps
    conv_code = 0  # _STATUS_ORDER.index(CONVERGED)
    conv = fin_status == conv_code
    res = np.full(nb, np.inf)
    rco = np.zeros(nb)

    if conv.any():
        idx = np.flatnonzero(conv)
        xc = fin_x[idx]
        ones = np.ones(idx.size)
        xc, perr, pdone, psing, _ = _newton_batch(
            h, xc, ones, eps, cfg.endgame_tol, cfg.max_corrector_iters, np.ones(idx.size, bool)
        )
        hv, jac, _ = h.eval_all_x(xc, ones, want_dt=False)
        res_c = _row_norms(hv)
        js, _ = _equilibrate(jac, hv)
        lu, perm, bad = lu_factor_batched(js, eps)
        rco_c = np.where(bad, 0.0, rco_batched(lu, perm, norm1_batched(js)))
        fin_x.put(idx, xc)
        fin_err[idx] = np.where(pdone, perr, np.minimum(perr, fin_err[idx]))
        res[idx] = res_c
        rco[idx] = rco_c
        fin_t[idx] = 1.0
        # Converged promises res <= corrector_tol at t=1; demote the rest
        fin_status[idx[res_c > cfg.corrector_tol]] = 2  # CorrectorFailed
        conv = fin_status == conv_code

    failed = ~conv
    if failed.any():
        idx = np.flatnonzero(failed)
        res[idx] = _residual_rows(h, fin_x[idx], fin_t[idx])

    out = []
    for k in range(nb):
        record = SolutionRecord(
            t=float(fin_t[k]),
            m=1,
            coords=ComplexVector(fin_x[k], precision),
            err=float(fin_err[k]),
            rco=float(rco[k]),
            res=float(res[k]),
        )
        out.append(
            PathResult(
                status=_STATUS_ORDER[int(fin_status[k])],
                endpoint=record,
                steps_taken=int(fin_steps[k]),
                start_index=int(orig[k]),
            )
        )
    return out


# ---------------------------------------------------------------------------
# single-path public operations
# ---------------------------------------------------------------------------


def _as_batch(h: Homotopy, x, precision: Precision):
    if isinstance(x, ComplexVector):
        return XCArr(
            tuple(c.reshape(1, -1) for c in x.data.re),
            tuple(c.reshape(1, -1) for c in x.data.im),
        ), x.precision
    arr = np.asarray(list(x), dtype=np.complex128).reshape(1, h.nvars)
    return XCArr.from_complex(arr, precision.limbs), precision


def newton_correct(
    h: Homotopy,
    x,
    t: float,
    cfg: TrackerConfig,
    precision: Precision = Precision.D,
):
    """Newton iteration at frozen t.

    Returns (x', err, rco, res, iters); raises SingularJacobianError when
    the Jacobian underflows the pivot threshold at the initial point.
    """
    xb, precision = _as_batch(h, x, precision)
    eps = precision.eps
    tvec = np.full(1, float(t))
    active = np.ones(1, dtype=bool)
    xb, err, done, sing, iters = _newton_batch(
        h, xb, tvec, eps, cfg.corrector_tol, cfg.max_corrector_iters, active
    )
    if sing[0]:
        raise SingularJacobianError("Jacobian singular during Newton correction")
    hv, jac, _ = h.eval_all_x(xb, tvec, want_dt=False)
    res = float(_row_norms(hv)[0])
    js, _ = _equilibrate(jac, hv)
    lu, perm, bad = lu_factor_batched(js, eps)
    rco = 0.0 if bad[0] else float(rco_batched(lu, perm, norm1_batched(js))[0])
    out = ComplexVector(xb[0], precision)
    return out, float(err[0]), rco, res, int(iters[0])


def predict_tangent(
    h: Homotopy,
    x,
    t: float,
    dt: float,
    precision: Precision = Precision.D,
) -> ComplexVector:
    """Euler prediction x + dt * xdot with dHdx · xdot = −dHdt."""
    xb, precision = _as_batch(h, x, precision)
    tvec = np.full(1, float(t))
    _, jac, ht = h.eval_all_x(xb, tvec, want_dt=True)
    xdot, sing = _solve_rows(jac, c_neg(ht), precision.eps)
    if sing[0]:
        raise SingularJacobianError("Jacobian singular at the prediction point")
    out = c_add(xb, _scale_rows(xdot, np.full(1, float(dt))))
    return ComplexVector(out[0], precision)


def track_path(
    h: Homotopy,
    start,
    cfg: TrackerConfig,
    precision: Precision = Precision.D,
    start_index: int = 0,
) -> PathResult:
    """Track a single path (a batch of one)."""
    arr = np.asarray(list(start), dtype=np.complex128)
    return track_batch(h, [arr], cfg, precision, [start_index])[0]


def classify_endpoint(
    r: PathResult,
    all_results: Sequence[PathResult],
    tol_cluster: float = 1e-8,
) -> SolutionRecord:
    """Attach multiplicity, realness and singularity flags to an endpoint.

    m counts converged endpoints (including r itself) within tol_cluster in
    the coordinate-wise max norm; is_real requires every imaginary part to
    be at most 1e-8 relative to the point's scale; singular means the
    inverse condition estimate dropped below 1e-8.
    """
    if r.status is not PathStatus.CONVERGED:
        return r.endpoint
    mine = r.endpoint.coords.to_complex()
    m = 0
    for other in all_results:
        if other.status is not PathStatus.CONVERGED:
            continue
        d = np.max(np.abs(other.endpoint.coords.to_complex() - mine))
        if d <= tol_cluster:
            m += 1
    scale = max(1.0, float(np.max(np.abs(mine))) if mine.size else 1.0)
    is_real = bool(np.all(np.abs(mine.imag) <= 1e-8 * scale))
    singular = r.endpoint.rco < 1e-8
    return replace(r.endpoint, m=max(m, 1), is_real=is_real, singular=singular)
