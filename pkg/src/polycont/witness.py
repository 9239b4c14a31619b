"""Witness sets for positive-dimensional solution components.

A dim-dimensional component of a polynomial system meets dim generic
hyperplanes in finitely many points, and that count is the component's
degree.  The intersection is computed through an embedding: every
equation gains random linear terms in dim slack variables zz1..zzdim,
and dim generic hyperplanes over all original + slack variables complete
the system.  At a solution with zero slacks the extra terms vanish, so
the slack-free solutions of the embedded system are exactly the generic
points of the slice -- the witness points.

Once a witness set is in hand, everything else is slice motion.  The
non-hyperplane rows of the embedded system are shared by the old and the
new instance, so a linear-in-t blend

    H(x, t) = gamma * (1 - t) * OLD(x) + t * NEW(x)

keeps those rows' zero sets fixed for every t while the hyperplanes
glide from the old position to the new one; tracking the witness points
through H samples the component wherever we like.  Moving the slices
around a closed loop permutes the witness points within their
irreducible component, so the orbits of a few random loops reveal the
factorization (monodromy breakup).  Completeness of a candidate factor
is certified by the linear trace: over a complete factor the sum of any
fixed coordinate is an affine-linear function of a parallel shift of one
slice, which a nonzero second difference over three shifts would betray.
Membership of a test point reduces to moving the slices through the
point and checking whether some witness point lands on it.

All random draws (slack coefficients, hyperplanes, loop gammas) come
from forked streams of one seed, so every operation here is a pure
function of its arguments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .homotopy import Homotopy, NotSquareError, _as_rng
from .linalg import ComplexVector
from .poly import (
    Coeff,
    DimensionMismatchError,
    Polynomial,
    PolySystem,
    format_system,
    parse_system,
)
from .rng import SplitMix64
from .solver import (
    SolverOptions,
    _track_all,
    format_solution,
    parse_solution_string,
    solve_blackbox,
)
from .tracker import PathStatus, SolutionRecord
from .xnum import DomainError, Precision

# Witness points must sit on the component: slack coordinates and the
# embedded residual are both held to this tolerance.
SLACK_TOL = 1e-8
# Tracked endpoints are matched to witness points in the max norm.
MATCH_TOL = 1e-6
# Linear-trace certification: second difference over three parallel
# slices at offsets {0, h, 2h}, measured relative to the trace size.
TRACE_TOL = 1e-6
TRACE_OFFSET = 0.1

# Fork tags for the per-operation random streams (all children of the
# operation's seed): keeping them distinct decouples the draws of the
# embedding, slice moves, trace offsets, membership slices and the k-th
# monodromy loop from one another.
_TAG_EMBED = 1
_TAG_MOVE = 2
_TAG_TRACE = 3
_TAG_MEMBER = 5
_TAG_LOOP = 100


class PathFailure(RuntimeError):
    """Some tracked points failed to land; statuses maps index -> PathStatus."""

    def __init__(self, message: str, statuses: Dict[int, PathStatus]):
        super().__init__(message)
        self.statuses = dict(statuses)


class LoopFailure(RuntimeError):
    """A monodromy loop produced no usable permutation of the points."""


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessSet:
    """A component of dimension set_dim represented by its slice points.

    ambient_dim is the original variable count; embedded is the square
    system that was actually solved (original equations with slack terms,
    zero-padding rows for non-square inputs, then set_dim hyperplanes);
    slices are the hyperplane rows as coefficient vectors (one entry per
    embedded variable, constant last); points are the witness points in
    embedded coordinates, slacks ~ 0.
    """

    ambient_dim: int
    set_dim: int
    embedded: PolySystem
    slices: Tuple[Tuple[complex, ...], ...]
    points: Tuple[SolutionRecord, ...]
    seed: int

    @property
    def degree(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class FactorPartition:
    """Witness point indices grouped by irreducible factor.

    blocks are disjoint index tuples covering range(degree); degrees are
    the block sizes; certified marks blocks that passed the linear trace
    test; loops and failures count the usable and the discarded
    monodromy loops that produced the partition.
    """

    blocks: Tuple[Tuple[int, ...], ...]
    degrees: Tuple[int, ...]
    certified: Tuple[bool, ...]
    loops: int
    failures: int


# ---------------------------------------------------------------------------
# embedding
# ---------------------------------------------------------------------------


def _slack_names(varnames: Tuple[str, ...], dim: int) -> Tuple[str, ...]:
    """zz1..zzdim, growing the prefix if the input already uses a name."""
    base = "zz"
    while any(f"{base}{k}" in varnames for k in range(1, dim + 1)):
        base += "z"
    return tuple(f"{base}{k}" for k in range(1, dim + 1))


def _hyperplane(vec: Sequence[complex], nvars: int) -> Polynomial:
    """Affine-linear row from a coefficient vector (variables.., constant)."""
    d = {}
    for k in range(nvars):
        exps = tuple(1 if j == k else 0 for j in range(nvars))
        d[exps] = Coeff.from_complex(complex(vec[k]))
    d[(0,) * nvars] = Coeff.from_complex(complex(vec[nvars]))
    return Polynomial.from_dict(d, nvars)


def _slice_vector(p: Polynomial, nvars: int) -> Tuple[complex, ...]:
    """Coefficient vector (variables.., constant) of an affine-linear row."""
    vec = [0j] * (nvars + 1)
    for m in p.terms:
        if m.degree == 0:
            vec[nvars] = m.coeff.to_complex()
        elif m.degree == 1:
            vec[m.exponents.index(1)] = m.coeff.to_complex()
        else:
            raise ValueError("hyperplane row contains a nonlinear term")
    return tuple(vec)


def embed(nvars: int, dim: int, s: PolySystem, seed: Union[int, SplitMix64]) -> PolySystem:
    """Add dim slack variables and dim generic hyperplanes to s.

    Every equation gains random unit-modulus linear terms in the slacks
    (so slack-free solutions satisfy the original equations and nothing
    else is special about them), and dim random hyperplanes over all
    nvars + dim variables are appended.  dim = 0 returns s unchanged.
    """
    if dim < 0:
        raise DomainError(f"embedding dimension must be >= 0, got {dim}")
    if s.nvars != nvars:
        raise DimensionMismatchError(
            f"system has {s.nvars} variables, caller announced {nvars}"
        )
    if dim == 0:
        return s
    rng = _as_rng(seed)
    names = s.varnames + _slack_names(s.varnames, dim)
    nv = nvars + dim
    polys = []
    for p in s.polys:
        d = {m.exponents + (0,) * dim: m.coeff for m in p.terms}
        for j in range(dim):
            exps = (0,) * nvars + tuple(1 if k == j else 0 for k in range(dim))
            d[exps] = Coeff.from_complex(rng.unit_complex())
        polys.append(Polynomial.from_dict(d, nv))
    for _ in range(dim):
        vec = [rng.unit_complex() for _ in range(nv + 1)]
        polys.append(_hyperplane(vec, nv))
    return PolySystem(tuple(polys), names)


def _with_slices(emb: PolySystem, dim: int, slices: Sequence[Sequence[complex]]) -> PolySystem:
    """Copy of an embedded system with its hyperplane rows replaced."""
    rows = tuple(_hyperplane(v, emb.nvars) for v in slices)
    return PolySystem(emb.polys[: emb.neq - dim] + rows, emb.varnames)


def _checked_slices(w: WitnessSet, new_slices) -> Tuple[Tuple[complex, ...], ...]:
    if len(new_slices) != w.set_dim:
        raise DimensionMismatchError(
            f"{len(new_slices)} slices for a set of dimension {w.set_dim}"
        )
    vecs = []
    for v in new_slices:
        vec = tuple(complex(c) for c in v)
        if len(vec) != w.embedded.nvars + 1:
            raise DimensionMismatchError(
                f"slice vector of length {len(vec)}; the embedded space "
                f"needs {w.embedded.nvars} coefficients plus a constant"
            )
        vecs.append(vec)
    return tuple(vecs)


def random_slices(w: WitnessSet, seed: Union[int, SplitMix64]) -> Tuple[Tuple[complex, ...], ...]:
    """Fresh generic hyperplanes with the shape of w.slices."""
    rng = _as_rng(seed)
    nv = w.embedded.nvars
    return tuple(
        tuple(rng.unit_complex() for _ in range(nv + 1)) for _ in range(w.set_dim)
    )


# ---------------------------------------------------------------------------
# witness computation
# ---------------------------------------------------------------------------


def witness_solve(s: PolySystem, dim: int, opts: SolverOptions = SolverOptions()) -> WitnessSet:
    """Generic points of the dim-dimensional part of the solution set.

    Underdetermined systems are squared by zero-row padding before the
    embedding; the padded rows turn into pure slack rows, which pin the
    slacks to the component.  The embedded system is solved blackbox and
    the solutions with every slack modulus (and residual) at most
    SLACK_TOL are kept: their count is the degree of the slice.
    """
    if dim < 0:
        raise DomainError(f"set dimension must be >= 0, got {dim}")
    if dim == 0:
        if not s.is_square():
            raise NotSquareError(
                f"isolated solving needs a square system, got "
                f"{s.neq} equations in {s.nvars} variables"
            )
        rep = solve_blackbox(s, opts)
        return WitnessSet(s.nvars, 0, s, (), rep.solutions, opts.seed)
    pad = s.nvars - s.neq
    if pad < 0:
        raise NotSquareError(
            f"cannot pad {s.neq} equations in {s.nvars} variables to square"
        )
    padded = PolySystem(s.polys + (Polynomial((), s.nvars),) * pad, s.varnames)
    emb = embed(s.nvars, dim, padded, SplitMix64(opts.seed).fork(_TAG_EMBED))
    rep = solve_blackbox(emb, opts)
    points = []
    for sol in rep.solutions:
        z = sol.coords.to_complex()
        if np.all(np.abs(z[s.nvars :]) <= SLACK_TOL) and sol.res <= SLACK_TOL:
            points.append(sol)
    slices = tuple(_slice_vector(p, emb.nvars) for p in emb.polys[-dim:])
    return WitnessSet(s.nvars, dim, emb, slices, tuple(points), opts.seed)


# ---------------------------------------------------------------------------
# slice motion
# ---------------------------------------------------------------------------


def _move_points(
    from_sys: PolySystem,
    to_sys: PolySystem,
    points: Sequence[np.ndarray],
    opts: SolverOptions,
    gamma: complex,
):
    """Track points from from_sys to to_sys along a linear coefficient blend.

    The non-hyperplane rows agree on both ends, so the blend multiplies
    them by gamma*(1-t) + t != 0 and their zero sets stay put; only the
    slice rows move.  The blend is built directly (not through the
    support-checked coefficient-homotopy constructor) because a slice
    through special points may lose a term -- e.g. the constant vanishes
    for a slice through the origin -- without harming the path geometry.
    """
    h = Homotopy(target=to_sys, start=from_sys, gamma=gamma, tpower=1)
    results = _track_all(h, list(points), opts.tracker_config(), opts.precision, opts.tasks)
    results.sort(key=lambda r: r.start_index)
    ends = [r.endpoint.coords.to_complex() for r in results]
    statuses = [r.status for r in results]
    return ends, statuses


def _failed(statuses: Sequence[PathStatus]) -> Dict[int, PathStatus]:
    return {i: st for i, st in enumerate(statuses) if st is not PathStatus.CONVERGED}


def move_slices(
    w: WitnessSet,
    new_slices: Sequence[Sequence[complex]],
    opts: SolverOptions = SolverOptions(),
) -> List[ComplexVector]:
    """Track the witness points onto new slice hyperplanes.

    Returns one sample of the component per witness point, in original
    (ambient) coordinates.  Raises PathFailure if any point fails to
    land; its statuses field says which.
    """
    vecs = _checked_slices(w, new_slices)
    to_sys = _with_slices(w.embedded, w.set_dim, vecs)
    gamma = SplitMix64(opts.seed).fork(_TAG_MOVE).unit_complex()
    pts = [sol.coords.to_complex() for sol in w.points]
    ends, statuses = _move_points(w.embedded, to_sys, pts, opts, gamma)
    bad = _failed(statuses)
    if bad:
        raise PathFailure(f"{len(bad)} of {len(pts)} sample paths failed", bad)
    return [
        ComplexVector.from_complex(e[: w.ambient_dim], opts.precision) for e in ends
    ]


# ---------------------------------------------------------------------------
# monodromy breakup
# ---------------------------------------------------------------------------


def _loop_permutation(
    w: WitnessSet, opts: SolverOptions, rng: SplitMix64
) -> List[int]:
    """One triangle loop old -> A -> B -> old; returns the induced permutation.

    perm[i] = j means the path started at point i returned onto point j.
    Raises LoopFailure when a leg fails or the matching is not a clean
    bijection at MATCH_TOL.
    """
    emb, dim = w.embedded, w.set_dim
    sys_a = _with_slices(emb, dim, random_slices(w, rng))
    sys_b = _with_slices(emb, dim, random_slices(w, rng))
    pts = [sol.coords.to_complex() for sol in w.points]
    cur = pts
    for leg_from, leg_to in ((emb, sys_a), (sys_a, sys_b), (sys_b, emb)):
        cur, statuses = _move_points(leg_from, leg_to, cur, opts, rng.unit_complex())
        bad = _failed(statuses)
        if bad:
            raise LoopFailure(f"loop leg lost {len(bad)} of {len(pts)} paths")
    witness_arr = np.stack(pts)
    perm = [-1] * len(pts)
    taken = [False] * len(pts)
    for i, z in enumerate(cur):
        dist = np.max(np.abs(witness_arr - z[None, :]), axis=1)
        hits = np.nonzero(dist <= MATCH_TOL)[0]
        if hits.size != 1 or taken[int(hits[0])]:
            raise LoopFailure(
                f"returned point {i} matched {hits.size} witness points"
            )
        perm[i] = int(hits[0])
        taken[perm[i]] = True
    return perm


def _blocks_of(parent: List[int]) -> Tuple[Tuple[int, ...], ...]:
    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    groups: Dict[int, List[int]] = {}
    for k in range(len(parent)):
        groups.setdefault(find(k), []).append(k)
    return tuple(tuple(groups[r]) for r in sorted(groups, key=lambda r: groups[r][0]))


def _trace_coordinate_sums(
    w: WitnessSet, idx: Sequence[int], opts: SolverOptions
) -> np.ndarray:
    """First-coordinate values of points idx at slice offsets {0, h, 2h}.

    The three slice systems shift the first hyperplane's constant by the
    offset (a parallel family); the other slices stay fixed.  Returns an
    array of shape (3, len(idx)); offset 0 needs no tracking.
    """
    idx = list(idx)
    rng = SplitMix64(w.seed).fork(_TAG_TRACE)
    gammas = (rng.unit_complex(), rng.unit_complex())
    pts = [w.points[i].coords.to_complex() for i in idx]
    rows = [np.array([p[0] for p in pts], dtype=np.complex128)]
    for off, gamma in zip((TRACE_OFFSET, 2.0 * TRACE_OFFSET), gammas):
        first = w.slices[0][:-1] + (w.slices[0][-1] + off,)
        shifted = (first,) + w.slices[1:]
        to_sys = _with_slices(w.embedded, w.set_dim, shifted)
        ends, statuses = _move_points(w.embedded, to_sys, pts, opts, gamma)
        bad = _failed(statuses)
        if bad:
            raise PathFailure(
                f"{len(bad)} of {len(pts)} trace sample paths failed", bad
            )
        rows.append(np.array([e[0] for e in ends], dtype=np.complex128))
    return np.stack(rows)


def _trace_residual(sums: np.ndarray) -> Tuple[bool, float]:
    t0, t1, t2 = (complex(v) for v in sums)
    resid = abs(t0 - 2.0 * t1 + t2)
    scale = max(1.0, abs(t0), abs(t1), abs(t2))
    return resid <= TRACE_TOL * scale, float(resid)


def trace_test(
    w: WitnessSet, block: Sequence[int], opts: SolverOptions = SolverOptions()
) -> Tuple[bool, float]:
    """Linear-trace completeness certificate for a candidate factor.

    Tracks the block's points to two parallel shifts of the first slice
    and forms the second difference of the summed first coordinate.  A
    complete factor's trace is affine-linear in the shift, so the
    residual only carries rounding noise; an incomplete block mixes in
    branches of the complement and generically fails by a wide margin.
    """
    idx = sorted(set(int(i) for i in block))
    if not idx or idx[0] < 0 or idx[-1] >= w.degree:
        raise DomainError(
            f"trace block must be a nonempty subset of 0..{w.degree - 1}"
        )
    if w.set_dim < 1:
        raise DomainError("trace test needs a positive-dimensional witness set")
    sums = _trace_coordinate_sums(w, idx, opts).sum(axis=1)
    return _trace_residual(sums)


def monodromy_breakup(
    w: WitnessSet,
    max_loops: int = 20,
    seed: int = 0,
    opts: Optional[SolverOptions] = None,
) -> FactorPartition:
    """Partition the witness points into irreducible factors.

    Random slice loops permute witness points within their component;
    the loop orbits are merged with union-find, and the linear trace
    certifies complete blocks.  Loops run until every block is certified
    or max_loops loop attempts (usable or failed) are spent.  Merging
    only coarsens, so an early stop can only leave a too-fine partition,
    never a wrong merge.
    """
    if w.set_dim < 1:
        raise DomainError("monodromy needs a positive-dimensional witness set")
    opts = opts if opts is not None else SolverOptions()
    n = w.degree
    if n == 0:
        return FactorPartition((), (), (), 0, 0)
    samples = _trace_coordinate_sums(w, range(n), opts)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    trace_cache: Dict[Tuple[int, ...], bool] = {}

    def certified(block: Tuple[int, ...]) -> bool:
        if block not in trace_cache:
            ok, _ = _trace_residual(samples[:, list(block)].sum(axis=1))
            trace_cache[block] = ok
        return trace_cache[block]

    loops = failures = attempts = 0
    while True:
        blocks = _blocks_of(parent)
        flags = tuple(certified(b) for b in blocks)
        if all(flags) or attempts >= max_loops:
            break
        attempts += 1
        try:
            perm = _loop_permutation(w, opts, SplitMix64(seed).fork(_TAG_LOOP + attempts))
        except LoopFailure:
            failures += 1
            continue
        loops += 1
        for i, j in enumerate(perm):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    return FactorPartition(
        blocks, tuple(len(b) for b in blocks), flags, loops, failures
    )


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------


def membership_test(
    w: WitnessSet, point: Sequence[complex], opts: SolverOptions = SolverOptions()
) -> bool:
    """Does a point lie on the component represented by the witness set?

    The slices are moved to generic hyperplanes through the point; the
    point is a member exactly when some witness point lands on it within
    MATCH_TOL.  Points whose residual on the non-slice rows is already
    large are rejected without tracking.
    """
    pt = np.asarray([complex(c) for c in point], dtype=np.complex128)
    if pt.shape != (w.ambient_dim,):
        raise DimensionMismatchError(
            f"point of length {pt.size}; the ambient space has "
            f"{w.ambient_dim} coordinates"
        )
    if w.set_dim == 0:
        return any(
            np.max(np.abs(sol.coords.to_complex() - pt)) <= MATCH_TOL
            for sol in w.points
        )
    nv = w.embedded.nvars
    emb_pt = np.concatenate([pt, np.zeros(w.set_dim, dtype=np.complex128)])
    vals, _ = w.embedded.plan.eval_and_jac_d(emb_pt)
    scale = np.maximum(1.0, w.embedded.plan.mag_d(np.abs(emb_pt)))
    body = w.embedded.neq - w.set_dim
    if np.any(np.abs(vals[:body]) > MATCH_TOL * scale[:body]):
        return False
    rng = SplitMix64(opts.seed).fork(_TAG_MEMBER)
    slices = []
    for _ in range(w.set_dim):
        normal = [rng.unit_complex() for _ in range(nv)]
        const = -sum(a * z for a, z in zip(normal, emb_pt))
        slices.append(tuple(normal) + (const,))
    to_sys = _with_slices(w.embedded, w.set_dim, slices)
    pts = [sol.coords.to_complex() for sol in w.points]
    ends, statuses = _move_points(w.embedded, to_sys, pts, opts, rng.unit_complex())
    bad = _failed(statuses)
    if bad:
        raise PathFailure(f"{len(bad)} of {len(pts)} membership paths failed", bad)
    return any(np.max(np.abs(e - emb_pt)) <= MATCH_TOL for e in ends)


# ---------------------------------------------------------------------------
# witness set files
# ---------------------------------------------------------------------------


_HEADER_KEYS = ("ambient_dim", "set_dim", "degree", "seed")
_HEADER_RE = re.compile(r"^(ambient_dim|set_dim|degree|seed)\s+(-?\d+)\s*$")
_SOLUTION_START_RE = re.compile(r"^solution\s+\d+\s*:\s*$")
_COORD_LINE_RE = re.compile(r"^\s*([A-Za-z][A-Za-z0-9_]*)\s*:")


def format_witness(w: WitnessSet) -> str:
    """Header, embedded system, then the points as solution blocks."""
    lines = [
        f"ambient_dim {w.ambient_dim}",
        f"set_dim {w.set_dim}",
        f"degree {w.degree}",
        f"seed {w.seed}",
    ]
    text = "\n".join(lines) + "\n" + format_system(w.embedded)
    blocks = [
        format_solution(sol, w.embedded.varnames, k + 1)
        for k, sol in enumerate(w.points)
    ]
    return text + "\n".join(blocks) + ("\n" if blocks else "")


def _is_real_coords(z: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(z))) if z.size else 1.0)
    return bool(np.all(np.abs(z.imag) <= 1e-8 * scale))


def _coord_name_order(chunk: List[str]) -> List[str]:
    """Coordinate names of one solution block, in printed order."""
    names = []
    in_coords = False
    for ln in chunk:
        if ln.strip() == "the solution for t :":
            in_coords = True
            continue
        m = _COORD_LINE_RE.match(ln)
        if in_coords and m:
            names.append(m.group(1))
    return names


def _reorder_vars(s: PolySystem, names: Sequence[str]) -> PolySystem:
    """The same system with its variables listed in the given order."""
    names = tuple(names)
    if names == s.varnames:
        return s
    if sorted(names) != sorted(s.varnames):
        raise ValueError(
            f"cannot reorder variables {s.varnames} as {names}"
        )
    idx = [s.varnames.index(n) for n in names]
    polys = []
    for p in s.polys:
        d = {tuple(m.exponents[i] for i in idx): m.coeff for m in p.terms}
        polys.append(Polynomial.from_dict(d, s.nvars))
    return PolySystem(tuple(polys), names)


def parse_witness(text: str) -> WitnessSet:
    """Inverse of format_witness (points to their printed digits).

    The system format lists variables by first appearance, which need
    not put the slacks last; the coordinate order of the solution blocks
    is authoritative and the parsed system is reordered to it.  A file
    with no points keeps the parsed order.
    """
    lines = text.splitlines()
    header: Dict[str, int] = {}
    pos = 0
    for key in _HEADER_KEYS:
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        m = _HEADER_RE.match(lines[pos]) if pos < len(lines) else None
        if not m or m.group(1) != key:
            raise ValueError(f"expected a '{key} <int>' header line")
        header[key] = int(m.group(2))
        pos += 1
    body = lines[pos:]
    split = next(
        (k for k, ln in enumerate(body) if _SOLUTION_START_RE.match(ln)), len(body)
    )
    emb = parse_system("\n".join(body[:split]))
    chunks: List[List[str]] = []
    chunk: List[str] = []
    for ln in body[split:]:
        if _SOLUTION_START_RE.match(ln) and chunk:
            chunks.append(chunk)
            chunk = []
        chunk.append(ln)
    if any(ln.strip() for ln in chunk):
        chunks.append(chunk)
    if chunks:
        emb = _reorder_vars(emb, _coord_name_order(chunks[0]))
    points = [_parse_point(c, emb.varnames) for c in chunks]
    if len(points) != header["degree"]:
        raise ValueError(
            f"degree header says {header['degree']} points, file has {len(points)}"
        )
    dim = header["set_dim"]
    slices = tuple(_slice_vector(p, emb.nvars) for p in emb.polys[emb.neq - dim :])
    return WitnessSet(
        ambient_dim=header["ambient_dim"],
        set_dim=dim,
        embedded=emb,
        slices=slices,
        points=tuple(points),
        seed=header["seed"],
    )


def _parse_point(chunk: List[str], names: Tuple[str, ...]) -> SolutionRecord:
    vals = parse_solution_string("\n".join(chunk))
    missing = [n for n in names if n not in vals]
    if missing:
        raise ValueError(f"solution block lacks coordinates {missing}")
    z = np.array([vals[n] for n in names], dtype=np.complex128)
    rco = float(vals["rco"].real)
    return SolutionRecord(
        t=float(vals["t"].real),
        m=int(vals["m"].real),
        coords=ComplexVector.from_complex(z, Precision.D),
        err=float(vals["err"].real),
        rco=rco,
        res=float(vals["res"].real),
        is_real=_is_real_coords(z),
        singular=rco < 1e-8,
    )


def read_witness(path) -> WitnessSet:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_witness(fh.read())


def write_witness(path, w: WitnessSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_witness(w))
