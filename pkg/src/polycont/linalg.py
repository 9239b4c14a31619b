"""Complex vectors, matrices and LU solves at every working precision.

Data layout: a complex array is a pair of limb tuples (re, im); each limb is
a float64 ndarray and the tuple length is the precision's limb count.  All
element-wise complex helpers broadcast the way numpy does because they are
built from numpy primitives limb by limb.

Double precision gets a fast path through LAPACK (scipy's lu_factor); the
multi-limb precisions run a hand-written right-looking LU with partial
pivoting whose row updates are vectorized.  Both paths share the same
contract: partial pivoting, a pivot-underflow test against
1e3 * eps(precision) * max-row-norm, and a 1-norm inverse-condition
estimate computed from the factorization.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .xnum import (
    ExtendedComplex,
    ExtendedReal,
    Precision,
    x_add,
    x_from_float,
    x_mul,
    x_mul_pow2,
    x_neg,
    x_recip,
    x_sqrt,
    x_sub,
    x_to_float,
)


class SingularMatrixError(ArithmeticError):
    """A pivot underflowed the singularity threshold during factorization."""


# ---------------------------------------------------------------------------
# complex limb arrays
# ---------------------------------------------------------------------------


class XCArr:
    """Complex ndarray with multi-limb components; shape follows the limbs."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = tuple(re)
        self.im = tuple(im)

    @property
    def limbs(self) -> int:
        return len(self.re)

    @property
    def shape(self):
        return np.shape(self.re[0])

    @classmethod
    def from_complex(cls, z, limbs: int) -> "XCArr":
        z = np.asarray(z, dtype=np.complex128)
        return cls(x_from_float(z.real, limbs), x_from_float(z.imag, limbs))

    @classmethod
    def zeros(cls, shape, limbs: int) -> "XCArr":
        return cls(
            tuple(np.zeros(shape) for _ in range(limbs)),
            tuple(np.zeros(shape) for _ in range(limbs)),
        )

    def to_complex(self) -> np.ndarray:
        return np.asarray(x_to_float(self.re) + 1j * x_to_float(self.im))

    def copy(self) -> "XCArr":
        return XCArr(tuple(c.copy() for c in self.re), tuple(c.copy() for c in self.im))

    def __getitem__(self, idx) -> "XCArr":
        re = self.re
        if len(re) == 1:
            return XCArr((re[0][idx],), (self.im[0][idx],))
        return XCArr(tuple(c[idx] for c in re), tuple(c[idx] for c in self.im))

    def put(self, idx, value: "XCArr") -> None:
        for mine, theirs in zip(self.re, value.re):
            mine[idx] = theirs
        for mine, theirs in zip(self.im, value.im):
            mine[idx] = theirs

    def reshape(self, shape) -> "XCArr":
        return XCArr(
            tuple(c.reshape(shape) for c in self.re),
            tuple(c.reshape(shape) for c in self.im),
        )

    def abs_hi(self) -> np.ndarray:
        """Cheap elementwise |.| approximation from the leading limbs."""
        return np.hypot(self.re[0], self.im[0])


def c_add(a: XCArr, b: XCArr) -> XCArr:
    return XCArr(x_add(a.re, b.re), x_add(a.im, b.im))


def c_sub(a: XCArr, b: XCArr) -> XCArr:
    return XCArr(x_sub(a.re, b.re), x_sub(a.im, b.im))


def c_neg(a: XCArr) -> XCArr:
    return XCArr(x_neg(a.re), x_neg(a.im))


def c_mul(a: XCArr, b: XCArr) -> XCArr:
    rr = x_sub(x_mul(a.re, b.re), x_mul(a.im, b.im))
    ii = x_add(x_mul(a.re, b.im), x_mul(a.im, b.re))
    return XCArr(rr, ii)


def c_recip(b: XCArr) -> XCArr:
    d = x_add(x_mul(b.re, b.re), x_mul(b.im, b.im))
    dr = x_recip(d)
    return XCArr(x_mul(b.re, dr), x_neg(x_mul(b.im, dr)))


def c_div(a: XCArr, b: XCArr) -> XCArr:
    return c_mul(a, c_recip(b))


def c_scale_re(a: XCArr, r) -> XCArr:
    """Multiply by a real limb tuple (broadcasting)."""
    return XCArr(x_mul(a.re, r), x_mul(a.im, r))


def c_ldexp(a: XCArr, e: np.ndarray) -> XCArr:
    """Scale by 2**e (integer array, broadcasting): exact at any precision.

    Multiplying every limb by the same power of two is exact — no
    renormalization needed — which makes this the right tool for
    equilibration-style rescaling that must not perturb values.
    """
    return XCArr(
        tuple(np.ldexp(c, e) for c in a.re),
        tuple(np.ldexp(c, e) for c in a.im),
    )


def c_modulus(a: XCArr) -> np.ndarray:
    """Elementwise modulus at the array's precision, as float64.

    Each entry is scaled by its own power of two before squaring, so values
    far below 1.0 (down to the denormal range) do not underflow to zero.
    The per-element scaling keeps every entry's result independent of its
    neighbours, which batched callers rely on for determinism.
    """
    if a.limbs == 1:
        return np.hypot(a.re[0], a.im[0])
    m = np.maximum(np.abs(a.re[0]), np.abs(a.im[0]))
    safe = np.where(np.isfinite(m) & (m != 0.0), m, 1.0)
    _, e = np.frexp(safe)
    e = np.clip(e, -1021, 1021)
    s = np.ldexp(1.0, -e)
    re = x_mul_pow2(a.re, s)
    im = x_mul_pow2(a.im, s)
    mod2 = x_add(x_mul(re, re), x_mul(im, im))
    return np.ldexp(x_to_float(x_sqrt(mod2)), e)


# ---------------------------------------------------------------------------
# LU factorization at multi-limb precision
# ---------------------------------------------------------------------------


def _row_norm_max(abs_entries: np.ndarray) -> float:
    if abs_entries.size == 0:
        return 0.0
    return float(np.max(np.sum(abs_entries, axis=1)))


def _x_lu_factor(A: XCArr, eps: float):
    """In-place right-looking LU with partial pivoting on a copy of A.

    Returns (LU, perm).  Raises SingularMatrixError when the chosen pivot
    falls below 1e3 * eps * (max 1-norm of the rows of A).
    """
    lu = A.copy()
    n = lu.shape[0]
    thresh = 1e3 * eps * _row_norm_max(lu.abs_hi())
    perm = np.arange(n)
    for k in range(n):
        col_mag = lu[slice(k, n), k].abs_hi()
        p = k + int(np.argmax(col_mag))
        if not (col_mag[p - k] > thresh):
            raise SingularMatrixError(f"pivot {col_mag[p - k]:.3e} below threshold {thresh:.3e}")
        if p != k:
            for c in lu.re + lu.im:
                c[[k, p], :] = c[[p, k], :]
            perm[[k, p]] = perm[[p, k]]
        if k + 1 < n:
            inv = c_recip(lu[k, k])
            mults = c_mul(lu[slice(k + 1, n), k], _bc(inv, (n - k - 1,)))
            lu.put((slice(k + 1, n), k), mults)
            sub = lu[slice(k + 1, n), slice(k + 1, n)]
            rank1 = c_mul(_expand(mults, 1), _expand(lu[k, slice(k + 1, n)], 0))
            lu.put((slice(k + 1, n), slice(k + 1, n)), c_sub(sub, rank1))
    return lu, perm


def _bc(a: XCArr, shape) -> XCArr:
    return XCArr(
        tuple(np.broadcast_to(c, shape) for c in a.re),
        tuple(np.broadcast_to(c, shape) for c in a.im),
    )


_EXPAND_IDX = {
    0: (None,),
    1: (slice(None), None),
    2: (slice(None), slice(None), None),
}


def _expand(a: XCArr, axis: int) -> XCArr:
    # same view expand_dims would build, without its argument plumbing
    idx = _EXPAND_IDX[axis]
    return XCArr(tuple(c[idx] for c in a.re), tuple(c[idx] for c in a.im))


def _x_lu_solve_factored(lu: XCArr, perm: np.ndarray, b: XCArr) -> XCArr:
    """Forward/back substitution; b has shape (n,) or (n, k)."""
    n = lu.shape[0]
    vec = b.shape == (n,)
    x = b.reshape((n, 1)).copy() if vec else b.copy()
    x = x[perm]
    for j in range(n - 1):
        pivot_row = _expand(x[j], 0)
        col = _expand(lu[slice(j + 1, n), j], 1)
        x.put(slice(j + 1, n), c_sub(x[slice(j + 1, n)], c_mul(col, pivot_row)))
    for j in range(n - 1, -1, -1):
        inv = c_recip(lu[j, j])
        xj = c_mul(x[j], _bc(inv, x[j].shape))
        x.put(j, xj)
        if j:
            col = _expand(lu[slice(0, j), j], 1)
            x.put(slice(0, j), c_sub(x[slice(0, j)], c_mul(col, _expand(xj, 0))))
    return x.reshape((n,)) if vec else x


def _x_rco(lu: XCArr, perm: np.ndarray, anorm1: float) -> float:
    """Exact 1-norm inverse condition from the factorization (n solves)."""
    n = lu.shape[0]
    eye = XCArr.from_complex(np.eye(n, dtype=np.complex128), lu.limbs)
    inv = _x_lu_solve_factored(lu, perm, eye)
    inv_norm1 = float(np.max(np.sum(inv.abs_hi(), axis=0)))
    if anorm1 == 0.0 or inv_norm1 == 0.0 or not np.isfinite(inv_norm1):
        return 0.0
    return float(min(1.0, 1.0 / (anorm1 * inv_norm1)))


# ---------------------------------------------------------------------------
# LU at double precision (LAPACK path)
# ---------------------------------------------------------------------------


def _d_lu_factor(A: np.ndarray, eps: float):
    thresh = 1e3 * eps * _row_norm_max(np.abs(A))
    with warnings.catch_warnings():
        # singularity is reported through our own pivot threshold below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    dmin = float(np.min(np.abs(np.diag(lu)))) if A.shape[0] else 0.0
    if not (dmin > thresh):
        raise SingularMatrixError(f"pivot {dmin:.3e} below threshold {thresh:.3e}")
    return lu, piv


def _d_lu_solve_factored(factors, b: np.ndarray) -> np.ndarray:
    return scipy.linalg.lu_solve(factors, b, check_finite=False)


def _d_rco(factors, anorm1: float) -> float:
    n = factors[0].shape[0]
    inv = scipy.linalg.lu_solve(factors, np.eye(n, dtype=np.complex128), check_finite=False)
    inv_norm1 = float(np.max(np.sum(np.abs(inv), axis=0)))
    if anorm1 == 0.0 or inv_norm1 == 0.0 or not np.isfinite(inv_norm1):
        return 0.0
    return float(min(1.0, 1.0 / (anorm1 * inv_norm1)))


# ---------------------------------------------------------------------------
# public uniform-precision types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplexVector:
    """Dense complex vector at a single working precision."""

    data: XCArr
    precision: Precision

    @classmethod
    def from_complex(cls, values: Sequence[complex], precision: Precision) -> "ComplexVector":
        arr = np.asarray(list(values), dtype=np.complex128)
        return cls(XCArr.from_complex(arr, precision.limbs), precision)

    def to_complex(self) -> np.ndarray:
        return self.data.to_complex()

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, i: int) -> ExtendedComplex:
        entry = self.data[i]
        return ExtendedComplex(
            ExtendedReal(tuple(float(c) for c in entry.re)),
            ExtendedReal(tuple(float(c) for c in entry.im)),
        )


@dataclass(frozen=True)
class ComplexMatrix:
    """Dense complex matrix at a single working precision."""

    data: XCArr
    precision: Precision

    @classmethod
    def from_complex(cls, values, precision: Precision) -> "ComplexMatrix":
        arr = np.asarray(values, dtype=np.complex128)
        if arr.ndim != 2:
            raise ValueError("ComplexMatrix expects a 2-d array")
        return cls(XCArr.from_complex(arr, precision.limbs), precision)

    def to_complex(self) -> np.ndarray:
        return self.data.to_complex()

    @property
    def shape(self):
        return self.data.shape


def max_norm(v: ComplexVector) -> float:
    """Largest entry modulus, computed at the vector's precision.

    Returns 0.0 for the empty vector.  The scaled modulus keeps entries near
    the underflow limit from collapsing to zero.
    """
    if len(v) == 0:
        return 0.0
    return float(np.max(c_modulus(v.data)))


def lu_solve(A: ComplexMatrix, b: ComplexVector):
    """Solve A x = b by LU with partial pivoting.

    Returns (x, rco) where rco is the 1-norm inverse condition estimate in
    [0, 1].  Raises SingularMatrixError on pivot underflow and ValueError
    when shapes or precisions disagree.
    """
    if A.precision != b.precision:
        raise ValueError("matrix and right-hand side carry different precisions")
    n, m = A.shape
    if n != m:
        raise ValueError(f"matrix must be square, got {A.shape}")
    if len(b) != n:
        raise ValueError(f"shape mismatch: matrix {A.shape}, rhs length {len(b)}")
    eps = A.precision.eps
    if A.precision is Precision.D:
        a = A.to_complex()
        anorm = _norm1_d(a)
        factors = _d_lu_factor(a, eps)
        x = _d_lu_solve_factored(factors, b.to_complex())
        rco = _d_rco(factors, anorm)
        return ComplexVector(XCArr.from_complex(x, 1), Precision.D), rco
    anorm = _norm1_x(A.data)
    lu, perm = _x_lu_factor(A.data, eps)
    x = _x_lu_solve_factored(lu, perm, b.data)
    rco = _x_rco(lu, perm, anorm)
    return ComplexVector(x, A.precision), rco


def _norm1_d(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(a), axis=0)))


def _norm1_x(a: XCArr) -> float:
    if a.shape[0] == 0:
        return 0.0
    return float(np.max(np.sum(a.abs_hi(), axis=0)))


# ---------------------------------------------------------------------------
# batched LU: one independent n-by-n system per leading-axis row
# ---------------------------------------------------------------------------
#
# The path tracker factors a block of Jacobians per step.  Every row of the
# batch is handled independently (pivot choice, threshold test, updates), so
# a path's arithmetic never depends on which other paths share its block.
# Singular rows are reported through a mask — never an exception — and their
# pivots are replaced by 1 so the rest of the batch stays finite.


def _mask_rows(value: XCArr, mask: np.ndarray, replacement: XCArr) -> XCArr:
    return XCArr(
        tuple(np.where(mask, r, v) for v, r in zip(value.re, replacement.re)),
        tuple(np.where(mask, r, v) for v, r in zip(value.im, replacement.im)),
    )


def lu_factor_batched(A: XCArr, eps: float):
    """Factor a (B, n, n) batch in place on a copy.

    Returns (lu, perm (B, n), singular (B,) bool).  The threshold matches
    the unbatched path: 1e3 * eps * max-row-1-norm, per batch element.
    """
    lu = A.copy()
    nb, n, _ = lu.shape
    abs_entries = lu.abs_hi()
    thresh = 1e3 * eps * np.max(np.sum(abs_entries, axis=2), axis=1)
    perm = np.tile(np.arange(n), (nb, 1))
    singular = np.zeros(nb, dtype=bool)
    bidx = np.arange(nb)
    one = XCArr.from_complex(np.ones(nb), lu.limbs)
    for k in range(n):
        col_mag = lu[:, k:, k].abs_hi()
        p = k + np.argmax(col_mag, axis=1)
        pivot_mag = col_mag[bidx, p - k]
        singular |= ~(pivot_mag > thresh)
        for c in lu.re + lu.im:
            rk = c[bidx, k, :].copy()
            c[bidx, k, :] = c[bidx, p, :]
            c[bidx, p, :] = rk
        pk = perm[bidx, k].copy()
        perm[bidx, k] = perm[bidx, p]
        perm[bidx, p] = pk
        # keep flagged rows finite; their results are discarded by callers
        pivot = _mask_rows(lu[:, k, k], singular, one)
        lu.put((bidx, k, k), pivot)
        if k + 1 < n:
            inv = c_recip(pivot)
            mults = c_mul(lu[:, k + 1 :, k], _expand(inv, 1))
            lu.put((slice(None), slice(k + 1, n), k), mults)
            sub = lu[:, k + 1 :, k + 1 :]
            rank1 = c_mul(_expand(mults, 2), lu[:, k : k + 1, k + 1 :])
            lu.put((slice(None), slice(k + 1, n), slice(k + 1, n)), c_sub(sub, rank1))
    return lu, perm, singular


def lu_solve_batched(lu: XCArr, perm: np.ndarray, b: XCArr) -> XCArr:
    """Substitution for a factored batch; b is (B, n) or (B, n, m)."""
    nb, n = lu.shape[0], lu.shape[1]
    vec = len(b.shape) == 2
    x = b.reshape((nb, n, 1)).copy() if vec else b.copy()
    bidx = np.arange(nb)[:, None]
    x = x[bidx, perm]
    for j in range(n - 1):
        col = _expand(lu[:, j + 1 :, j], 2)
        x.put(
            (slice(None), slice(j + 1, n)),
            c_sub(x[:, j + 1 :], c_mul(col, x[:, j : j + 1])),
        )
    for j in range(n - 1, -1, -1):
        inv = _expand(c_recip(lu[:, j, j]), 1)
        xj = c_mul(x[:, j], inv)
        x.put((slice(None), j), xj)
        if j:
            col = _expand(lu[:, :j, j], 2)
            x.put(
                (slice(None), slice(0, j)),
                c_sub(x[:, :j], c_mul(col, _expand(xj, 1))),
            )
    return x.reshape((nb, n)) if vec else x


def rco_batched(lu: XCArr, perm: np.ndarray, anorm1: np.ndarray) -> np.ndarray:
    """1-norm inverse-condition estimate per batch row, in [0, 1]."""
    nb, n = lu.shape[0], lu.shape[1]
    eye = XCArr.from_complex(np.broadcast_to(np.eye(n), (nb, n, n)).copy(), lu.limbs)
    inv = lu_solve_batched(lu, perm, eye)
    inv_norm1 = np.max(np.sum(inv.abs_hi(), axis=1), axis=1)
    denom = anorm1 * inv_norm1
    with np.errstate(divide="ignore", invalid="ignore"):
        rco = np.where(
            (denom > 0.0) & np.isfinite(denom), np.minimum(1.0, 1.0 / denom), 0.0
        )
    return rco


def norm1_batched(A: XCArr) -> np.ndarray:
    """Matrix 1-norm per batch row of a (B, n, n) array."""
    return np.max(np.sum(A.abs_hi(), axis=1), axis=1)
