"""Circles tangent to three given circles, solved as eight sign systems.

A tangent circle with center (x, y) and radius r satisfies, for each
input circle i,

    (x - cx_i)^2 + (y - cy_i)^2 - (r + sigma_i * r_i)^2 = 0,

one equation per input circle, with sigma_i = +1/-1 selecting the
tangency kind.  Each of the 8 sign vectors gives three quadrics in
(x, y, r) with two finite solutions that mirror each other between
opposite sign vectors as r -> -r, so reporting the larger-real-radius
branch per sign vector enumerates the classical eight tangent circles.
A solution counts as real when every imaginary part is at rounding
level; the rendered radius is then |Re r|.

Internally each sign system is solved in a row-reduced form whose
quadratic parts cancel (see _reduced_system), so a cold solve tracks
two paths per sign system instead of the naive eight of the dense
Bezout count.  Interactive use re-solves the same structure under tiny
input motion, so solutions are cached per session token and moved to
the new input through a coefficient homotopy instead of a fresh
total-degree solve.  Any support change or path failure falls back to
the cold solve; stale results are never returned.
"""

from __future__ import annotations

import itertools
import math
import secrets
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .homotopy import (
    SupportMismatchError,
    ZeroDegreePolynomialError,
    coefficient_homotopy,
)
from .poly import Coeff, Monomial, Polynomial, PolySystem, _term_sort_key
from .rng import SplitMix64
from .solver import SolverOptions, _is_real_point, _track_all, dedupe, solve_blackbox
from .tracker import PathStatus, SolutionRecord, default_config

SIGN_VECTORS: Tuple[Tuple[int, int, int], ...] = tuple(
    itertools.product((1, -1), repeat=3)
)
SINGULAR_RCO = 1e-8
_VARNAMES = ("x", "y", "r")


def _warm_tracker_config(opts: SolverOptions):
    """Step policy for warm re-solves after a small input drag.

    The cached solution sits within Newton range of the new system, so
    the first step spans nearly the whole t interval; when a drag is too
    large for that, the step-shrink machinery falls back to ordinary
    continuation, and path failure falls back to a cold solve.
    """
    if opts.tracker is not None:
        return opts.tracker
    return replace(
        default_config(opts.precision),
        initial_step=0.99,
        max_step=0.99,
        step_expand=2.0,
    )


class InvalidInputError(ValueError):
    """Input circles are malformed (count, radius sign, non-finite)."""


class IllPosedError(RuntimeError):
    """Every path of every sign system ended singular or lost."""


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float


@dataclass(frozen=True)
class ApolloniusInput:
    circles: Tuple[Circle, Circle, Circle]

    def __post_init__(self):
        if len(self.circles) != 3:
            raise InvalidInputError(f"need exactly 3 circles, got {len(self.circles)}")
        for k, c in enumerate(self.circles):
            if not all(math.isfinite(v) for v in (c.cx, c.cy, c.r)):
                raise InvalidInputError(f"circle {k + 1} has non-finite fields")
            if c.r <= 0:
                raise InvalidInputError(f"circle {k + 1} has radius {c.r}; need > 0")


def input_from_floats(values: Sequence[Sequence[float]]) -> ApolloniusInput:
    """Build an input from three (cx, cy, r) triples."""
    if len(values) != 3:
        raise InvalidInputError(f"need exactly 3 circles, got {len(values)}")
    circles = []
    for k, row in enumerate(values):
        if len(row) != 3:
            raise InvalidInputError(f"circle {k + 1} needs (cx, cy, r)")
        try:
            circles.append(Circle(float(row[0]), float(row[1]), float(row[2])))
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"circle {k + 1}: {exc}") from exc
    return ApolloniusInput(tuple(circles))


@dataclass(frozen=True)
class TangentCircle:
    signs: Tuple[int, int, int]
    status: str  # "converged" or "no_solution"
    x: complex
    y: complex
    r: complex
    is_real: bool
    singular: bool
    err: float
    rco: float
    res: float


@dataclass(frozen=True)
class ApolloniusOutput:
    entries: Tuple[TangentCircle, ...]  # exactly 8, one per sign vector
    session: str
    elapsed_ms: float
    warm: bool

    def rendered(self) -> List[Tuple[float, float, float]]:
        """(x, y, radius) of the circles to draw: real entries, |Re r|."""
        return [
            (e.x.real, e.y.real, abs(e.r.real)) for e in self.entries if e.is_real
        ]


# ---------------------------------------------------------------------------
# the polynomial systems
# ---------------------------------------------------------------------------


def _quadric_terms(circ: Circle, s: int) -> dict:
    return {
        (2, 0, 0): 1.0,
        (0, 2, 0): 1.0,
        (0, 0, 2): -1.0,
        (1, 0, 0): -2.0 * circ.cx,
        (0, 1, 0): -2.0 * circ.cy,
        (0, 0, 1): -2.0 * s * circ.r,
        (0, 0, 0): circ.cx**2 + circ.cy**2 - circ.r**2,
    }


def _poly_of(terms: dict) -> Polynomial:
    """Polynomial with the exponent template of ``terms`` kept verbatim.

    Zero coefficients are retained on purpose: dragging a circle must never
    change the monomial support of its tangency system (a center crossing
    an axis, or two equal radii, would otherwise drop a term), because the
    warm-start homotopy matches coefficients monomial by monomial.  Only a
    row whose coefficients vanish simultaneously collapses to the zero
    polynomial, which downstream reports as a degenerate input.
    """
    if all(complex(v) == 0.0 for v in terms.values()):
        return Polynomial.from_dict({}, 3)
    items = sorted(terms.items(), key=lambda item: _term_sort_key(item[0]))
    return Polynomial(
        tuple(Monomial(Coeff.from_complex(complex(v)), e) for e, v in items), 3
    )


def apollonius_system(c: ApolloniusInput, signs: Sequence[int]) -> PolySystem:
    """Three tangency quadrics in (x, y, r) for one sign vector."""
    if len(signs) != 3 or any(s not in (1, -1) for s in signs):
        raise InvalidInputError(f"sign vector must be three of +-1, got {signs!r}")
    polys = [_poly_of(_quadric_terms(circ, s)) for circ, s in zip(c.circles, signs)]
    return PolySystem(tuple(polys), _VARNAMES)


def _reduced_system(c: ApolloniusInput, signs: Sequence[int]) -> PolySystem:
    """Row-reduced tangency system with the same solution set.

    Every tangency quadric shares the leading part x^2 + y^2 - r^2, so
    subtracting the first equation from the other two cancels it exactly
    and leaves two affine rows.  The Bezout count drops from 8 to 2 --
    the two finite mirror solutions -- so no continuation path runs off
    to infinity, which keeps interactive solves fast.
    """
    c0, s0 = c.circles[0], signs[0]
    polys = [_poly_of(_quadric_terms(c0, s0))]
    base_const = c0.cx**2 + c0.cy**2 - c0.r**2
    for circ, s in zip(c.circles[1:], signs[1:]):
        polys.append(
            _poly_of(
                {
                    (1, 0, 0): -2.0 * (circ.cx - c0.cx),
                    (0, 1, 0): -2.0 * (circ.cy - c0.cy),
                    (0, 0, 1): -2.0 * (s * circ.r - s0 * c0.r),
                    (0, 0, 0): (circ.cx**2 + circ.cy**2 - circ.r**2) - base_const,
                }
            )
        )
    return PolySystem(tuple(polys), _VARNAMES)


# ---------------------------------------------------------------------------
# session cache
# ---------------------------------------------------------------------------


@dataclass
class _CacheEntry:
    inp: ApolloniusInput
    sols: Tuple[Tuple[SolutionRecord, ...], ...]  # per sign vector
    output: ApolloniusOutput
    stamp: float = 0.0  # set by SessionCache.put


class SessionCache:
    """Token -> last input and solutions; LRU-bounded, entries expire.

    All methods take the lock, so concurrent requests see a consistent
    read-modify-write sequence.  The clock is injectable for tests.
    """

    def __init__(
        self,
        maxsize: int = 64,
        ttl_seconds: float = 600.0,
        clock: Callable[[], float] = time.monotonic,
    ):
        if maxsize < 1:
            raise ValueError("maxsize must be >= 1")
        self.maxsize = maxsize
        self.ttl_seconds = ttl_seconds
        self._clock = clock
        self._lock = threading.Lock()
        self._entries: "OrderedDict[str, _CacheEntry]" = OrderedDict()

    def get(self, token: str) -> Optional[_CacheEntry]:
        with self._lock:
            entry = self._entries.get(token)
            if entry is None:
                return None
            if self._clock() - entry.stamp > self.ttl_seconds:
                del self._entries[token]
                return None
            self._entries.move_to_end(token)
            return entry

    def put(self, token: str, entry: _CacheEntry) -> None:
        with self._lock:
            entry.stamp = self._clock()
            self._entries[token] = entry
            self._entries.move_to_end(token)
            while len(self._entries) > self.maxsize:
                self._entries.popitem(last=False)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


def _choose_entry(
    signs: Tuple[int, int, int], sols: Sequence[SolutionRecord]
) -> TangentCircle:
    """One reported circle per sign system: the largest-real-radius branch
    (deterministic lexicographic tie-break for conjugate pairs)."""
    if not sols:
        return TangentCircle(
            signs=signs,
            status="no_solution",
            x=0j,
            y=0j,
            r=0j,
            is_real=False,
            singular=True,
            err=float("nan"),
            rco=0.0,
            res=float("nan"),
        )

    def key(rec: SolutionRecord):
        x, y, r = rec.coords.to_complex()
        return (r.real, r.imag, x.real, x.imag, y.real, y.imag)

    best = max(sols, key=key)
    x, y, r = best.coords.to_complex()
    return TangentCircle(
        signs=signs,
        status="converged",
        x=complex(x),
        y=complex(y),
        r=complex(r),
        is_real=_is_real_point(np.array([x, y, r])),
        singular=best.rco < SINGULAR_RCO,
        err=float(best.err),
        rco=float(best.rco),
        res=float(best.res),
    )


def _solve_one_cold(
    c: ApolloniusInput, k: int, opts: SolverOptions
) -> Tuple[SolutionRecord, ...]:
    sys_k = _reduced_system(c, SIGN_VECTORS[k])
    try:
        rep = solve_blackbox(sys_k, replace(opts, seed=opts.seed + k))
    except ZeroDegreePolynomialError:
        # a difference row collapsed to a constant or to zero: the sign
        # system is degenerate (e.g. coincident circles), nothing finite
        return ()
    return tuple(rep.solutions)


def _solve_cold(
    c: ApolloniusInput, opts: SolverOptions
) -> Tuple[Tuple[SolutionRecord, ...], ...]:
    return tuple(
        _solve_one_cold(c, k, opts) for k in range(len(SIGN_VECTORS))
    )


def _warm_one(
    old_sys: PolySystem,
    new_sys: PolySystem,
    sols: Tuple[SolutionRecord, ...],
    opts: SolverOptions,
    seed: int,
) -> Optional[Tuple[SolutionRecord, ...]]:
    """Track cached solutions to the new coefficients; None means the
    caller must fall back to a cold solve for this sign system."""
    if not sols:
        return None
    try:
        h = coefficient_homotopy(old_sys, new_sys, SplitMix64(seed))
    except SupportMismatchError:
        return None
    points = [rec.coords.to_complex() for rec in sols]
    results = _track_all(
        h, points, _warm_tracker_config(opts), opts.precision, opts.tasks
    )
    if any(r.status is not PathStatus.CONVERGED for r in results):
        return None
    results.sort(key=lambda r: r.start_index)
    moved = [r.endpoint for r in results]
    out = []
    for rec in dedupe(moved):
        z = rec.coords.to_complex()
        out.append(
            replace(
                rec,
                is_real=_is_real_point(z),
                singular=rec.rco < SINGULAR_RCO,
            )
        )
    return tuple(out)


def apollonius_solve(
    c: ApolloniusInput,
    session: Optional[str] = None,
    cache: Optional[SessionCache] = None,
    opts: SolverOptions = SolverOptions(),
) -> ApolloniusOutput:
    """All eight tangency sign systems, warm-started from the session cache.

    A cached identical input is replayed verbatim; a cached nearby input
    seeds a coefficient homotopy per sign system, with cold fallback on
    support changes or path failures.  Raises IllPosedError when no sign
    system has a nonsingular solution (e.g. three identical circles).
    """
    t0 = time.perf_counter()
    cached = cache.get(session) if (cache is not None and session) else None
    if cached is not None and cached.inp == c:
        return cached.output

    warm = False
    per_sign: Optional[Tuple[Tuple[SolutionRecord, ...], ...]] = None
    if cached is not None:
        moved: List[Tuple[SolutionRecord, ...]] = []
        any_warm = False
        for k, signs in enumerate(SIGN_VECTORS):
            old_sys = _reduced_system(cached.inp, signs)
            new_sys = _reduced_system(c, signs)
            got = _warm_one(old_sys, new_sys, cached.sols[k], opts, opts.seed + k)
            if got is None:
                got = _solve_one_cold(c, k, opts)
            else:
                any_warm = True
            moved.append(got)
        per_sign = tuple(moved)
        warm = any_warm
    if per_sign is None:
        per_sign = _solve_cold(c, opts)

    entries = tuple(
        _choose_entry(signs, sols) for signs, sols in zip(SIGN_VECTORS, per_sign)
    )
    if all(e.status != "converged" or e.singular for e in entries):
        raise IllPosedError(
            "no sign system has a nonsingular solution; the configuration "
            "is degenerate (e.g. coincident input circles)"
        )
    token = session if session else secrets.token_hex(16)
    output = ApolloniusOutput(
        entries=entries,
        session=token,
        elapsed_ms=(time.perf_counter() - t0) * 1000.0,
        warm=warm,
    )
    if cache is not None:
        cache.put(token, _CacheEntry(inp=c, sols=per_sign, output=output))
    return output
