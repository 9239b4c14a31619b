"""Homotopies between polynomial systems.

The artificial-parameter family is

    H(x, t) = gamma * (1 - t)^k * G(x) + t^k * F(x),      t: 0 -> 1

with G a total-degree start system (x_i^{d_i} - c_i for random unit-modulus
c_i) whose solutions are scaled roots-of-unity grids, and gamma a random
unit-modulus constant.  A random gamma makes the path set miss the
discriminant with probability one, so no path hits a singularity before
t = 1.  Coefficient homotopies reuse the same evaluator with k = 1 and the
roles (start = old instance, target = new instance); they require identical
monomial support.

Evaluation accepts a trailing batch of points: x may be (nvars,) or
(B, nvars), matching the evaluation-plan convention.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .linalg import XCArr, c_add, c_mul
from .poly import Coeff, Polynomial, PolySystem, degrees
from .rng import SplitMix64
from .xnum import ShapeMismatchError


class NotSquareError(ValueError):
    """The operation needs as many equations as variables."""


class ZeroDegreePolynomialError(ValueError):
    """A constant (or zero) polynomial admits no start-system factor."""


class SupportMismatchError(ValueError):
    """Coefficient homotopies need identical monomial supports."""


@dataclass(frozen=True)
class StartSolutionSet:
    """All start solutions of a total-degree start system."""

    points: Tuple[np.ndarray, ...]
    degrees: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.points)


def _as_rng(seed: Union[int, SplitMix64]) -> SplitMix64:
    return seed if isinstance(seed, SplitMix64) else SplitMix64(seed)


def total_degree_start(target: PolySystem, seed: Union[int, SplitMix64]):
    """Start system x_i^{d_i} - c_i plus its roots-of-unity solution grid.

    The c_i are random points on the unit circle, so every start solution
    x_i = c_i^{1/d_i} * exp(2*pi*i*k/d_i) has modulus one.  Solutions are
    enumerated in lexicographic order of the index grid, which fixes the
    path order for a given seed.
    """
    if not target.is_square():
        raise NotSquareError(
            f"start construction needs a square system, got "
            f"{target.neq} equations in {target.nvars} variables"
        )
    degs = degrees(target)
    if any(d < 1 for d in degs):
        bad = [i + 1 for i, d in enumerate(degs) if d < 1]
        raise ZeroDegreePolynomialError(
            f"equations {bad} have degree < 1; no total-degree start exists"
        )
    rng = _as_rng(seed)
    angles = [2.0 * np.pi * rng.uniform() for _ in degs]
    consts = [cmath.exp(1j * a) for a in angles]
    polys = []
    nv = target.nvars
    for i, (d, c) in enumerate(zip(degs, consts)):
        exps_hi = tuple(d if j == i else 0 for j in range(nv))
        exps_lo = (0,) * nv
        polys.append(
            Polynomial.from_dict(
                {exps_hi: Coeff.from_complex(1.0 + 0.0j), exps_lo: Coeff.from_complex(-c)},
                nv,
            )
        )
    start = PolySystem(tuple(polys), target.varnames)
    axes = []
    for d, a in zip(degs, angles):
        base = a / d
        axes.append([cmath.exp(1j * (base + 2.0 * np.pi * k / d)) for k in range(d)])
    points = tuple(
        np.array(combo, dtype=np.complex128) for combo in itertools.product(*axes)
    )
    return start, StartSolutionSet(points, degs)


@dataclass(frozen=True)
class Homotopy:
    """Convex-like blend of two systems with a random gamma factor."""

    target: PolySystem
    start: PolySystem
    gamma: complex
    tpower: int = 2

    def __post_init__(self):
        if (
            self.target.neq != self.start.neq
            or self.target.nvars != self.start.nvars
        ):
            raise ShapeMismatchError(
                f"target is {self.target.neq}x{self.target.nvars}, "
                f"start is {self.start.neq}x{self.start.nvars}"
            )
        if not 0.1 <= abs(self.gamma) <= 10.0:
            raise ValueError(f"|gamma| = {abs(self.gamma):.3g} outside [0.1, 10]")
        if self.tpower < 1:
            raise ValueError("tpower must be a positive integer")

    @property
    def nvars(self) -> int:
        return self.target.nvars

    @property
    def neq(self) -> int:
        return self.target.neq

    def weights(self, t):
        """(w_g, w_f, dw_g, dw_f) so H = w_g*G + w_f*F and dH/dt likewise.

        t may be a scalar or an array of per-path parameter values.
        """
        k = self.tpower
        om = 1.0 - t
        wg = self.gamma * om**k
        wf = t**k + 0.0j
        dwg = -k * self.gamma * om ** (k - 1)
        dwf = k * t ** (k - 1) + 0.0j
        return wg, wf, dwg, dwf

    # -- double-precision convenience path (scalar t) ------------------------

    def eval_all_d(self, x: np.ndarray, t: float):
        """H, dH/dx, dH/dt at double precision; x is (..., n)."""
        wg, wf, dwg, dwf = self.weights(float(t))
        f, jf = self.target.plan.eval_and_jac_d(x)
        g, jg = self.start.plan.eval_and_jac_d(x)
        return (
            wg * g + wf * f,
            wg * jg + wf * jf,
            dwg * g + dwf * f,
        )

    # -- limb path (used by the tracker at every precision) -----------------

    def eval_all_x(self, x: XCArr, t, want_dt: bool = True):
        """H, dH/dx and optionally dH/dt at x's precision.

        x is (..., n); t is a scalar or an array matching the batch shape
        (one parameter value per path in the block).
        """
        limbs = x.limbs
        t_arr = np.asarray(t, dtype=np.float64)
        wg, wf, dwg, dwf = self.weights(t_arr)
        if t_arr.ndim:
            # per-row weights broadcast across the coordinate axis
            wg, wf, dwg, dwf = (w[..., None] for w in (wg, wf, dwg, dwf))
        f, jf = self.target.plan.eval_and_jac_x(x)
        g, jg = self.start.plan.eval_and_jac_x(x)
        cwg = XCArr.from_complex(wg, limbs)
        cwf = XCArr.from_complex(wf, limbs)
        h = c_add(c_mul(cwg, g), c_mul(cwf, f))
        if t_arr.ndim:
            jwg, jwf = cwg[..., None], cwf[..., None]
        else:
            jwg, jwf = cwg, cwf
        jac = c_add(c_mul(jwg, jg), c_mul(jwf, jf))
        if not want_dt:
            return h, jac, None
        cdg = XCArr.from_complex(dwg, limbs)
        cdf = XCArr.from_complex(dwf, limbs)
        ht = c_add(c_mul(cdg, g), c_mul(cdf, f))
        return h, jac, ht

    def mag_all(self, absx: np.ndarray, t) -> np.ndarray:
        """Magnitude scale of each H row at |x| (plain doubles).

        |gamma| * (1-t)^k * M_G(|x|) + t^k * M_F(|x|), where M evaluates a
        system with all coefficients and coordinates replaced by moduli.
        Bounds the intermediate-term size of an H evaluation, hence its
        rounding-noise level.
        """
        t_arr = np.asarray(t, dtype=np.float64)
        k = self.tpower
        wg = abs(self.gamma) * (1.0 - t_arr) ** k
        wf = t_arr**k
        if t_arr.ndim:
            wg, wf = wg[..., None], wf[..., None]
        return wg * self.start.plan.mag_d(absx) + wf * self.target.plan.mag_d(absx)


def make_homotopy(
    target: PolySystem,
    start: PolySystem,
    seed: Union[int, SplitMix64],
    tpower: int = 2,
) -> Homotopy:
    """Blend target and start with a seeded unit-modulus gamma."""
    rng = _as_rng(seed)
    gamma = rng.unit_complex()
    return Homotopy(target=target, start=start, gamma=gamma, tpower=tpower)


def eval_homotopy(h: Homotopy, x, t: float):
    """Public evaluation: (H, dHdx, dHdt) as precision-tagged containers."""
    from .linalg import ComplexMatrix, ComplexVector
    from .poly import _point_to_backend
    from .xnum import Precision

    data, precision = _point_to_backend(h.target, x, Precision.D)
    hv, jac, ht = h.eval_all_x(data, t)
    return (
        ComplexVector(hv, precision),
        ComplexMatrix(jac, precision),
        ComplexVector(ht, precision),
    )


def coefficient_homotopy(
    from_sys: PolySystem,
    to_sys: PolySystem,
    seed: Union[int, SplitMix64],
) -> Homotopy:
    """Linear-in-t coefficient interpolation: H = gamma*(1-t)*from + t*to.

    Start solutions are the solutions of `from_sys`.  Both systems must
    share their monomial support equation by equation; otherwise a fresh
    total-degree solve is the caller's fallback.
    """
    if from_sys.varnames != to_sys.varnames or from_sys.neq != to_sys.neq:
        raise SupportMismatchError(
            "systems differ in shape or variables; coefficient path undefined"
        )
    for k, (p, q) in enumerate(zip(from_sys.polys, to_sys.polys)):
        if p.support() != q.support():
            raise SupportMismatchError(
                f"equation {k + 1} changes its monomial support"
            )
    rng = _as_rng(seed)
    gamma = rng.unit_complex()
    return Homotopy(target=to_sys, start=from_sys, gamma=gamma, tpower=1)
