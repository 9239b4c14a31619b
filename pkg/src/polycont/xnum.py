"""Multi-limb floating point arithmetic: double, double-double, quad-double.

A value is carried as an unevaluated sum of 1, 2 or 4 doubles ("limbs"),
ordered by decreasing magnitude and non-overlapping: |limb[i+1]| is at most
half an ulp of limb[i].  All kernels in this module operate element-wise on
tuples of equally-shaped float64 arrays so the same code serves scalars
(0-d arrays) and the bulk vector/matrix types in :mod:`polycont.linalg`.

The building blocks are the classic error-free transformations: ``two_sum``
(Knuth, branch-free), ``quick_two_sum`` (assumes ordered inputs) and
``two_prod`` with a Dekker split (this interpreter has no fused
multiply-add).  Double-double add/mul follow the usual accurate variants;
quad-double add/mul use the sloppy accumulation dataflow followed by a
mask-based renormalization that skips over cancelled (zero) components the
same way the branchy scalar renormalization would.

Division and square root are Newton refinements of a plain double estimate:
one refinement step per extra limb pair (one for DD, two for QD).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker's constant

# Unit roundoff per precision, as quoted for the tracker's pivot thresholds.
_EPS_BY_LIMBS = {1: 2.220446049250313e-16, 2: 4.930380657631324e-32, 4: 1.2154326714572542e-63}


class Precision(enum.Enum):
    """Working precision of a solve: 1, 2 or 4 limbs per real number."""

    D = "d"
    DD = "dd"
    QD = "qd"

    @property
    def limbs(self) -> int:
        return {"d": 1, "dd": 2, "qd": 4}[self.value]

    @property
    def eps(self) -> float:
        return _EPS_BY_LIMBS[self.limbs]

    @classmethod
    def from_flag(cls, flag: str) -> "Precision":
        try:
            return cls(flag.lower())
        except ValueError:
            raise ValueError(f"unknown precision flag {flag!r}; expected d, dd or qd") from None


# ---------------------------------------------------------------------------
# error-free transformations (element-wise on float64 arrays)
# ---------------------------------------------------------------------------


def two_sum(a, b):
    """s + err == a + b exactly, s = fl(a+b)."""
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    """Like two_sum but assumes |a| >= |b| (or a == 0)."""
    s = a + b
    err = b - (s - a)
    return s, err


def split(a):
    """Dekker split of a double into high/low 26-bit halves."""
    t = _SPLITTER * a
    hi = t - (t - a)
    lo = a - hi
    return hi, lo


def two_prod(a, b):
    """p + err == a * b exactly, p = fl(a*b)."""
    p = a * b
    ahi, alo = split(a)
    bhi, blo = split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def _three_sum(a, b, c):
    """(a', b', c') with a'+b'+c' == a+b+c, a' = fl of the sum."""
    t1, t2 = two_sum(a, b)
    a2, t3 = two_sum(c, t1)
    b2, c2 = two_sum(t2, t3)
    return a2, b2, c2


def _three_sum2(a, b, c):
    """Like _three_sum but the third component is dropped into b'."""
    t1, t2 = two_sum(a, b)
    a2, t3 = two_sum(c, t1)
    return a2, t2 + t3


# ---------------------------------------------------------------------------
# renormalization
# ---------------------------------------------------------------------------


def _renorm_commit(cs, nout):
    """Compress a roughly-ordered list of components to `nout` limbs.

    First a bottom-up quick_two_sum cascade concentrates the value in the
    leading components, then a masked accumulate-and-commit pass writes
    non-zero components left to right, which keeps cancelled components from
    leaving holes in the limb sequence.  Vector equivalent of the branchy
    scalar renormalization.
    """
    cs = list(cs)
    m = len(cs)
    s = cs[m - 1]
    for i in range(m - 2, -1, -1):
        s, e = quick_two_sum(cs[i], s)
        cs[i + 1] = e
        cs[i] = s
    acc = cs[0]
    zeros = np.zeros_like(np.asarray(acc, dtype=np.float64))
    out = [zeros.copy() for _ in range(nout)]
    k = np.zeros(zeros.shape, dtype=np.int64)
    for x in cs[1:]:
        s, e = quick_two_sum(acc, x)
        full = k >= nout - 1
        commit = (e != 0.0) & ~full
        for slot in range(nout - 1):
            mask = commit & (k == slot)
            if mask.any():
                out[slot] = np.where(mask, s, out[slot])
        acc = np.where(commit, e, s)
        k = k + commit
    for slot in range(nout):
        out[slot] = np.where(k == slot, acc, out[slot])
    return tuple(out)


def _renorm(cs, nout):
    """Two commit passes; the second pass restores strict non-overlap in the
    rare near-tie cases the single pass leaves behind."""
    first = _renorm_commit(cs, nout)
    return _renorm_commit(list(first), nout)


# ---------------------------------------------------------------------------
# double-double kernels
# ---------------------------------------------------------------------------


def _dd_add(a, b):
    s, e = two_sum(a[0], b[0])
    t, f = two_sum(a[1], b[1])
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    s, e = quick_two_sum(s, e)
    return s, e


def _dd_mul(a, b):
    p, e = two_prod(a[0], b[0])
    e = e + (a[0] * b[1] + a[1] * b[0] + a[1] * b[1])
    p, e = quick_two_sum(p, e)
    return p, e


# ---------------------------------------------------------------------------
# quad-double kernels
# ---------------------------------------------------------------------------


def _qd_add(a, b):
    s0, t0 = two_sum(a[0], b[0])
    s1, t1 = two_sum(a[1], b[1])
    s2, t2 = two_sum(a[2], b[2])
    s3, t3 = two_sum(a[3], b[3])
    s1, t0 = two_sum(s1, t0)
    s2, t0, t1 = _three_sum(s2, t0, t1)
    s3, t0 = _three_sum2(s3, t0, t2)
    t0 = t0 + t1 + t3
    return _renorm((s0, s1, s2, s3, t0), 4)


def _qd_mul(a, b):
    p0, q0 = two_prod(a[0], b[0])
    p1, q1 = two_prod(a[0], b[1])
    p2, q2 = two_prod(a[1], b[0])
    p3, q3 = two_prod(a[0], b[2])
    p4, q4 = two_prod(a[1], b[1])
    p5, q5 = two_prod(a[2], b[0])

    p1, p2, q0 = _three_sum(p1, p2, q0)

    p2, q1, q2 = _three_sum(p2, q1, q2)
    p3, p4, p5 = _three_sum(p3, p4, p5)
    s0, t0 = two_sum(p2, p3)
    s1, t1 = two_sum(q1, p4)
    s2 = q2 + p5
    s1, t0 = two_sum(s1, t0)
    s2 = s2 + (t0 + t1)

    s1 = s1 + (a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0] + q0 + q3 + q4 + q5)
    return _renorm((p0, p1, s0, s1, s2), 4)


# ---------------------------------------------------------------------------
# generic limb-tuple operations
# ---------------------------------------------------------------------------


def x_zero(limbs: int, shape=()):
    z = np.zeros(shape, dtype=np.float64)
    return tuple(z.copy() for _ in range(limbs))


def x_from_float(a, limbs: int):
    """Promote a float64 array (exact: extra limbs are zero)."""
    a = np.asarray(a, dtype=np.float64)
    z = np.zeros_like(a)
    return (a,) + tuple(z.copy() for _ in range(limbs - 1))


def x_to_float(a):
    """Round a limb tuple to double (sum from the smallest limb up)."""
    s = a[-1]
    for i in range(len(a) - 2, -1, -1):
        s = s + a[i]
    return s


def x_neg(a):
    return tuple(-c for c in a)


def _patch_specials(raw, out):
    """Propagate inf/nan from the plain double result; the error-free
    transforms turn infinities into NaNs otherwise."""
    bad = ~np.isfinite(raw)
    if not bad.any():
        return out
    first = np.where(bad, raw, out[0])
    rest = tuple(np.where(bad, 0.0, c) for c in out[1:])
    return (first, *rest)


def x_add(a, b):
    L = len(a)
    if L == 1:
        return (a[0] + b[0],)
    res = _dd_add(a, b) if L == 2 else _qd_add(a, b)
    return _patch_specials(a[0] + b[0], res)


def x_sub(a, b):
    if len(a) == 1:
        return (a[0] - b[0],)
    return x_add(a, x_neg(b))


def x_mul(a, b):
    L = len(a)
    if L == 1:
        return (a[0] * b[0],)
    res = _dd_mul(a, b) if L == 2 else _qd_mul(a, b)
    return _patch_specials(a[0] * b[0], res)


def x_mul_pow2(a, f: float):
    """Scale by an exact power of two (error free on every limb)."""
    return tuple(c * f for c in a)


def x_recip(b):
    """1/b by Newton refinement of the double estimate."""
    L = len(b)
    if L == 1:
        return (1.0 / b[0],)
    x = x_from_float(1.0 / b[0], L)
    one = x_from_float(np.ones_like(b[0]), L)
    for _ in range(1 if L == 2 else 2):
        r = x_sub(one, x_mul(b, x))
        x = x_add(x, x_mul(x, r))
    return x


def x_div(a, b):
    if len(a) == 1:
        return (a[0] / b[0],)
    return x_mul(a, x_recip(b))


def x_sqrt(a):
    """sqrt by Newton refinement; caller guards against negative input."""
    L = len(a)
    if L == 1:
        return (np.sqrt(a[0]),)
    y0 = np.sqrt(a[0])
    y = x_from_float(y0, L)
    # guard exact zeros: Newton would divide by zero
    nz = a[0] != 0.0
    safe = np.where(nz, y0, 1.0)
    half_rec = x_from_float(0.5 / safe, L)
    for _ in range(1 if L == 2 else 2):
        r = x_sub(a, x_mul(y, y))
        y = x_add(y, x_mul(r, half_rec))
        if L == 4:
            half_rec = x_mul_pow2(x_recip(y), 0.5)
    return tuple(np.where(nz, c, 0.0) for c in y)


def x_powi(a, n: int):
    """Integer power by repeated squaring (n >= 0)."""
    L = len(a)
    result = x_from_float(np.ones_like(np.asarray(a[0], dtype=np.float64)), L)
    base = a
    k = n
    while k > 0:
        if k & 1:
            result = x_mul(result, base)
        base = x_mul(base, base) if k > 1 else base
        k >>= 1
    return result


def x_truncate(a, limbs: int):
    """Round down to fewer limbs (drop the tail)."""
    return tuple(a[:limbs])


def x_to_fraction(a) -> Fraction:
    """Exact rational value of a scalar limb tuple."""
    total = Fraction(0)
    for c in a:
        total += Fraction(float(c))
    return total


def x_from_fraction(v: Fraction, limbs: int):
    """Round an exact rational to `limbs` limbs, nearest per limb."""
    out = []
    rest = Fraction(v)
    for _ in range(limbs):
        h = float(rest)
        out.append(h)
        rest = rest - Fraction(h)
    return tuple(np.float64(c) for c in out)


# ---------------------------------------------------------------------------
# public scalar types
# ---------------------------------------------------------------------------


def _as_cells(values: Iterable[float]) -> tuple:
    return tuple(np.float64(v) for v in values)


@dataclass(frozen=True)
class ExtendedReal:
    """Scalar multi-limb real; `limbs` has length 1, 2 or 4."""

    limbs: tuple

    def __post_init__(self):
        if len(self.limbs) not in (1, 2, 4):
            raise ValueError("ExtendedReal must have 1, 2 or 4 limbs")
        object.__setattr__(self, "limbs", _as_cells(self.limbs))

    @classmethod
    def from_float(cls, v: float, precision: Precision = Precision.D) -> "ExtendedReal":
        return cls(x_from_float(np.float64(v), precision.limbs))

    @classmethod
    def from_fraction(cls, v: Fraction, precision: Precision) -> "ExtendedReal":
        return cls(x_from_fraction(v, precision.limbs))

    @property
    def precision(self) -> Precision:
        return {1: Precision.D, 2: Precision.DD, 4: Precision.QD}[len(self.limbs)]

    def to_float(self) -> float:
        return float(x_to_float(self.limbs))

    def to_fraction(self) -> Fraction:
        return x_to_fraction(self.limbs)

    def __neg__(self) -> "ExtendedReal":
        return ExtendedReal(x_neg(self.limbs))

    def __add__(self, other: "ExtendedReal") -> "ExtendedReal":
        return ext_add(self, other)

    def __sub__(self, other: "ExtendedReal") -> "ExtendedReal":
        return ext_add(self, -other)

    def __mul__(self, other: "ExtendedReal") -> "ExtendedReal":
        return ext_mul(self, other)

    def __truediv__(self, other: "ExtendedReal") -> "ExtendedReal":
        _check_match(self, other)
        return ExtendedReal(x_div(self.limbs, other.limbs))


class ShapeMismatchError(ValueError):
    """Operands carry different precisions or incompatible shapes."""


def _check_match(a: ExtendedReal, b: ExtendedReal) -> None:
    if len(a.limbs) != len(b.limbs):
        raise ShapeMismatchError(
            f"precision mismatch: {len(a.limbs)} limbs vs {len(b.limbs)} limbs"
        )


def ext_add(a: ExtendedReal, b: ExtendedReal) -> ExtendedReal:
    """Sum at the operands' shared precision."""
    _check_match(a, b)
    return ExtendedReal(x_add(a.limbs, b.limbs))


def ext_mul(a: ExtendedReal, b: ExtendedReal) -> ExtendedReal:
    """Product at the operands' shared precision."""
    _check_match(a, b)
    return ExtendedReal(x_mul(a.limbs, b.limbs))


def ext_sqrt(a: ExtendedReal) -> ExtendedReal:
    if a.limbs[0] < 0.0:
        raise DomainError("square root of a negative extended real")
    return ExtendedReal(x_sqrt(a.limbs))


class DomainError(ValueError):
    """Operation outside its mathematical domain (e.g. sqrt of a negative)."""


@dataclass(frozen=True)
class ExtendedComplex:
    """Scalar complex number with multi-limb real and imaginary parts."""

    re: ExtendedReal
    im: ExtendedReal

    @classmethod
    def from_complex(cls, z: complex, precision: Precision = Precision.D) -> "ExtendedComplex":
        return cls(
            ExtendedReal.from_float(z.real, precision),
            ExtendedReal.from_float(z.imag, precision),
        )

    @property
    def precision(self) -> Precision:
        return self.re.precision

    def to_complex(self) -> complex:
        return complex(self.re.to_float(), self.im.to_float())

    def __add__(self, other: "ExtendedComplex") -> "ExtendedComplex":
        return ExtendedComplex(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ExtendedComplex") -> "ExtendedComplex":
        return ExtendedComplex(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "ExtendedComplex":
        return ExtendedComplex(-self.re, -self.im)

    def __mul__(self, other: "ExtendedComplex") -> "ExtendedComplex":
        rr = self.re * other.re - self.im * other.im
        ii = self.re * other.im + self.im * other.re
        return ExtendedComplex(rr, ii)

    def conjugate(self) -> "ExtendedComplex":
        return ExtendedComplex(self.re, -self.im)

    def modulus(self) -> float:
        """|z| computed at the operand's precision, returned as double."""
        L = len(self.re.limbs)
        if L == 1:
            return float(np.hypot(self.re.limbs[0], self.im.limbs[0]))
        m = max(abs(float(self.re.limbs[0])), abs(float(self.im.limbs[0])))
        if m == 0.0:
            return 0.0
        # scale by a power of two so the squares stay in range
        s = 2.0 ** (-math.frexp(m)[1])
        re = x_mul_pow2(self.re.limbs, s)
        im = x_mul_pow2(self.im.limbs, s)
        mod2 = x_add(x_mul(re, re), x_mul(im, im))
        return float(x_to_float(x_sqrt(mod2))) / s
