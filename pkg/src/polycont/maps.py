"""Exact monomial-map solutions of binomial systems.

A binomial system (every equation the difference of two terms) restricts
to the algebraic torus as a system of Laurent-monomial equations

    x^{a_i - b_i} = -c2_i / c1_i =: r_i,

so its torus solutions form finitely many cosets of a subtorus.  With
A the integer matrix of exponent differences, a Smith normal form
U A W = D (U, W unimodular, D diagonal) turns the constraints into
decoupled root extractions u_k^{d_k} = s_k where s = r^U: each choice of
roots is one coset, the kernel columns of W parametrize the subtorus,
and mapping back through W gives a monomial map

    x_j = lambda_j * t_1^{V_j1} * ... * t_dim^{V_jdim}

that satisfies the input identically in the parameters t.  Because W is
unimodular the kernel columns span the full lattice, so each map covers
its coset once.

Components with zero coordinates are found the same way on coordinate
strata: choose variables to pin at zero; an equation either vanishes
entirely (both terms touch the zero set), survives as a binomial in the
remaining variables, or kills the stratum (one term alone cannot vanish
on a torus).  Solving the surviving binomials on the smaller torus and
re-inserting the zeros yields the remaining maps.

Coefficient magnitudes are solved in log space and the angles by
integer-weighted sums of tracked branches in double precision; one
Newton polish of the root extractions at double-double accuracy removes
the accumulated rounding before the coefficients are recombined.
"""

from __future__ import annotations

import cmath
import itertools
import math
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .poly import Coeff, DimensionMismatchError, Polynomial, PolySystem
from .xnum import (
    ExtendedComplex,
    ExtendedReal,
    Precision,
    x_truncate,
)

# A diagonal constraint row with zero diagonal demands s = 1 exactly; the
# check runs on doubles, so allow rounding noise in log/angle space.
CONSISTENCY_TOL = 1e-8


class NotBinomialError(ValueError):
    """An equation does not have exactly two (nonzero) terms."""


# ---------------------------------------------------------------------------
# integer linear algebra
# ---------------------------------------------------------------------------


def smith_normal_form(rows: Sequence[Sequence[int]]):
    """Diagonalize an integer matrix: returns (diag, U, W) with U A W = D.

    U and W are unimodular (integer inverses exist), the diagonal is
    nonnegative with each entry dividing the next, and zero entries come
    last.  Plain Python integers throughout, so no overflow.
    """
    M = [[int(v) for v in row] for row in rows]
    m = len(M)
    n = len(M[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    W = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_sub(i, j, q):  # row i -= q * row j
        M[i] = [a - q * b for a, b in zip(M[i], M[j])]
        U[i] = [a - q * b for a, b in zip(U[i], U[j])]

    def col_sub(j, i, q):  # col j -= q * col i
        for row in M:
            row[j] -= q * row[i]
        for row in W:
            row[j] -= q * row[i]

    def row_swap(i, j):
        M[i], M[j] = M[j], M[i]
        U[i], U[j] = U[j], U[i]

    def col_swap(i, j):
        for row in M:
            row[i], row[j] = row[j], row[i]
        for row in W:
            row[i], row[j] = row[j], row[i]

    def row_neg(i):
        M[i] = [-a for a in M[i]]
        U[i] = [-a for a in U[i]]

    k = 0
    while k < min(m, n):
        pivot = min(
            (
                (abs(M[i][j]), i, j)
                for i in range(k, m)
                for j in range(k, n)
                if M[i][j]
            ),
            default=None,
        )
        if pivot is None:
            break
        row_swap(k, pivot[1])
        col_swap(k, pivot[2])
        if M[k][k] < 0:
            row_neg(k)
        # clear row and column k; division remainders become smaller
        # pivots, so this loop drives |M[k][k]| down and terminates
        while True:
            again = False
            for i in range(k + 1, m):
                if M[i][k]:
                    row_sub(i, k, M[i][k] // M[k][k])
                    if M[i][k]:
                        row_swap(k, i)
                        if M[k][k] < 0:
                            row_neg(k)
                        again = True
            for j in range(k + 1, n):
                if M[k][j]:
                    col_sub(j, k, M[k][j] // M[k][k])
                    if M[k][j]:
                        col_swap(k, j)
                        again = True
            if not again:
                break
        # divisibility chain: the pivot must divide the rest of the
        # matrix; pulling a violating row up reintroduces it at step k
        viol = next(
            (
                i
                for i in range(k + 1, m)
                for j in range(k + 1, n)
                if M[i][j] % M[k][k]
            ),
            None,
        )
        if viol is not None:
            row_sub(k, viol, -1)
            continue
        k += 1
    diag = [M[i][i] for i in range(min(m, n))]
    return diag, U, W


# ---------------------------------------------------------------------------
# domain type
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonomialMap:
    """x_j = coeff_j * prod_k t_k^{exponents[j][k]}, zeros included.

    degree is the largest total parameter degree of any coordinate,
    counting positive exponents (the convention printed as "degree = k";
    it matches the geometric degree for the cases exercised here).
    """

    varnames: Tuple[str, ...]
    dim: int
    degree: int
    coeffs: Tuple[ExtendedComplex, ...]
    exponents: Tuple[Tuple[int, ...], ...]

    @property
    def domain_note(self) -> str:
        """Parameters that must stay nonzero (negative exponents)."""
        bad = sorted(
            {k + 1 for row in self.exponents for k, e in enumerate(row) if e < 0}
        )
        if not bad:
            return ""
        return "nonzero parameters required: " + ", ".join(f"t{k}" for k in bad)


def evaluate_map(m: MonomialMap, tvals: Sequence[complex]) -> np.ndarray:
    """Point of the component at the given parameter values."""
    if len(tvals) != m.dim:
        raise DimensionMismatchError(
            f"{len(tvals)} parameter values for a {m.dim}-dimensional map"
        )
    out = np.empty(len(m.varnames), dtype=np.complex128)
    for j, (c, row) in enumerate(zip(m.coeffs, m.exponents)):
        val = c.to_complex()
        for t, e in zip(tvals, row):
            val *= complex(t) ** e
        out[j] = val
    return out


# ---------------------------------------------------------------------------
# double-double scalar helpers
# ---------------------------------------------------------------------------


def _ec_dd(z: complex) -> ExtendedComplex:
    return ExtendedComplex.from_complex(complex(z), Precision.DD)


def _ec_from_coeff(c: Coeff) -> ExtendedComplex:
    return ExtendedComplex(
        ExtendedReal(x_truncate(c.re, 2)), ExtendedReal(x_truncate(c.im, 2))
    )


def _ec_div(a: ExtendedComplex, b: ExtendedComplex) -> ExtendedComplex:
    den = b.re * b.re + b.im * b.im
    num = a * b.conjugate()
    return ExtendedComplex(num.re / den, num.im / den)


def _ec_powi(a: ExtendedComplex, e: int) -> ExtendedComplex:
    if e < 0:
        return _ec_div(_ec_dd(1.0), _ec_powi(a, -e))
    out = _ec_dd(1.0)
    base = a
    while e:
        if e & 1:
            out = out * base
        base = base * base
        e >>= 1
    return out


def _dd_root_polish(u0: complex, d: int, s: ExtendedComplex) -> ExtendedComplex:
    """One double-double Newton step on u^d = s from a double seed."""
    u = _ec_dd(u0)
    if d == 1:
        return s
    up = _ec_powi(u, d - 1)
    f = up * u - s
    fp = up * _ec_dd(float(d))
    return u - _ec_div(f, fp)


# ---------------------------------------------------------------------------
# the solver
# ---------------------------------------------------------------------------


def _binomial_data(p: Polynomial, index: int):
    """(exponent difference, coefficient ratio r = -c2/c1) of one equation."""
    if len(p.terms) != 2:
        raise NotBinomialError(
            f"equation {index + 1} has {len(p.terms)} terms; need exactly 2"
        )
    t1, t2 = p.terms
    diff = tuple(a - b for a, b in zip(t1.exponents, t2.exponents))
    return diff, (t1.coeff, t2.coeff)


def _torus_maps(
    rows: List[Tuple[int, ...]],
    ratios: List[Tuple[Coeff, Coeff]],
    free_vars: List[int],
    zero_vars: List[int],
    varnames: Tuple[str, ...],
) -> List[MonomialMap]:
    """All monomial maps of one coordinate stratum.

    rows/ratios describe the surviving binomials over free_vars; the
    zero_vars coordinates are pinned at 0 in every returned map.
    """
    nf = len(free_vars)
    diag, U, W = smith_normal_form(rows) if rows else ([], [], [[int(i == j) for j in range(nf)] for i in range(nf)])
    rank = sum(1 for d in diag if d)
    dim = nf - rank

    # branch-tracked logs and angles of the ratios, in doubles
    logs = []
    for c1, c2 in ratios:
        z1, z2 = c1.to_complex(), c2.to_complex()
        r = -z2 / z1
        logs.append((math.log(abs(r)), cmath.phase(r)))
    s_log = []
    for i in range(len(rows)):
        lm = sum(U[i][k] * logs[k][0] for k in range(len(logs)))
        ar = sum(U[i][k] * logs[k][1] for k in range(len(logs)))
        s_log.append((lm, ar))
    # rows of D beyond the rank demand s = 1: reject inconsistent strata
    for i in range(rank, len(rows)):
        lm, ar = s_log[i]
        wrapped = (ar + math.pi) % (2.0 * math.pi) - math.pi
        if abs(lm) > CONSISTENCY_TOL or abs(wrapped) > CONSISTENCY_TOL:
            return []

    # double-double ratios and their U-combinations for the polish
    r_dd = [
        _ec_div(-_ec_from_coeff(c2), _ec_from_coeff(c1)) for c1, c2 in ratios
    ]
    s_dd = []
    for i in range(rank):
        acc = _ec_dd(1.0)
        for k in range(len(r_dd)):
            if U[i][k]:
                acc = acc * _ec_powi(r_dd[k], U[i][k])
        s_dd.append(acc)

    # kernel columns of W parametrize the subtorus; flip columns that
    # are entirely nonpositive (the inversion t -> 1/t), so exponents
    # come out nonnegative whenever that is possible
    V = [[W[j][c] for c in range(rank, nf)] for j in range(nf)]
    for c in range(dim):
        col = [V[j][c] for j in range(nf)]
        if any(col) and max(col) <= 0:
            for j in range(nf):
                V[j][c] = -V[j][c]

    maps = []
    grids = [range(d) for d in diag[:rank]]
    for ks in itertools.product(*grids):
        lam_dd = []
        for j in range(nf):
            acc = _ec_dd(1.0)
            for i in range(rank):
                if W[j][i]:
                    d = diag[i]
                    lm, ar = s_log[i]
                    u0 = cmath.exp(
                        complex(lm / d, (ar + 2.0 * math.pi * ks[i]) / d)
                    )
                    acc = acc * _ec_powi(_dd_root_polish(u0, d, s_dd[i]), W[j][i])
            lam_dd.append(acc)
        coeffs: List[ExtendedComplex] = [None] * len(varnames)
        exps: List[Tuple[int, ...]] = [None] * len(varnames)
        for pos, j in enumerate(free_vars):
            coeffs[j] = lam_dd[pos]
            exps[j] = tuple(V[pos])
        for j in zero_vars:
            coeffs[j] = _ec_dd(0.0)
            exps[j] = (0,) * dim
        degree = max(
            (sum(e for e in row if e > 0) for row in exps), default=0
        )
        maps.append(
            MonomialMap(
                varnames=varnames,
                dim=dim,
                degree=degree,
                coeffs=tuple(coeffs),
                exponents=tuple(exps),
            )
        )
    return maps


def solve_binomials(
    nvars: int, s: PolySystem, puretopdim: bool = False
) -> List[MonomialMap]:
    """All monomial-map components of a binomial system.

    Strata are enumerated by the set of coordinates pinned to zero, the
    torus part of each stratum is solved exactly through the Smith
    normal form, and with puretopdim only the maps of maximal dimension
    survive.  Raises NotBinomialError when an equation is not a
    two-term polynomial -- the caller's cue to fall back to the general
    continuation solver.
    """
    if s.nvars != nvars:
        raise DimensionMismatchError(
            f"system has {s.nvars} variables, caller announced {nvars}"
        )
    data = [_binomial_data(p, i) for i, p in enumerate(s.polys)]
    supports = [
        (
            frozenset(k for k, e in enumerate(p.terms[0].exponents) if e),
            frozenset(k for k, e in enumerate(p.terms[1].exponents) if e),
        )
        for p in s.polys
    ]
    maps: List[MonomialMap] = []
    for nzero in range(nvars + 1):
        for zeros in itertools.combinations(range(nvars), nzero):
            zset = set(zeros)
            rows: List[Tuple[int, ...]] = []
            ratios: List[Tuple[Coeff, Coeff]] = []
            ok = True
            for (diff, coeffs), (sup1, sup2) in zip(data, supports):
                hit1, hit2 = bool(sup1 & zset), bool(sup2 & zset)
                if hit1 and hit2:
                    continue  # both terms vanish on the stratum
                if hit1 or hit2:
                    ok = False  # a lone monomial cannot vanish on a torus
                    break
                rows.append(diff)
                ratios.append(coeffs)
            if not ok:
                continue
            free = [j for j in range(nvars) if j not in zset]
            reduced = [tuple(row[j] for j in free) for row in rows]
            maps.extend(
                _torus_maps(reduced, ratios, free, sorted(zset), s.varnames)
            )
    if puretopdim and maps:
        top = max(m.dim for m in maps)
        maps = [m for m in maps if m.dim == top]
    return maps


# ---------------------------------------------------------------------------
# the printed form
# ---------------------------------------------------------------------------


def format_map(m: MonomialMap) -> List[str]:
    """One string per variable, then the dimension and degree lines.

    The coordinate lines read "x - (1+0j)*t1**1": variable minus its
    parametrization, the coefficient printed as a Python complex and
    every parameter with a nonzero exponent spelled t<k>**<e>.
    """
    lines = []
    for name, c, row in zip(m.varnames, m.coeffs, m.exponents):
        body = repr(c.to_complex())
        for k, e in enumerate(row):
            if e:
                body += f"*t{k + 1}**{e}"
        lines.append(f"{name} - {body}")
    lines.append(f"dimension = {m.dim}")
    lines.append(f"degree = {m.degree}")
    return lines


_MAP_COORD_RE = re.compile(
    r"^([A-Za-z][A-Za-z0-9_]*) - ([^*]+)((?:\*t\d+\*\*-?\d+)*)$"
)
_MAP_FACTOR_RE = re.compile(r"\*t(\d+)\*\*(-?\d+)")
_MAP_DIM_RE = re.compile(r"^dimension = (\d+)$")
_MAP_DEG_RE = re.compile(r"^degree = (\d+)$")


def parse_map(lines: Sequence[str]) -> MonomialMap:
    """Inverse of format_map (coefficients to their printed digits)."""
    names: List[str] = []
    coeffs: List[ExtendedComplex] = []
    factors: List[List[Tuple[int, int]]] = []
    dim: Optional[int] = None
    degree: Optional[int] = None
    for line in lines:
        mdim = _MAP_DIM_RE.match(line.strip())
        if mdim:
            dim = int(mdim.group(1))
            continue
        mdeg = _MAP_DEG_RE.match(line.strip())
        if mdeg:
            degree = int(mdeg.group(1))
            continue
        mco = _MAP_COORD_RE.match(line.strip())
        if not mco:
            raise ValueError(f"unrecognized map line: {line!r}")
        names.append(mco.group(1))
        coeffs.append(_ec_dd(complex(mco.group(2))))
        factors.append(
            [(int(a), int(b)) for a, b in _MAP_FACTOR_RE.findall(mco.group(3))]
        )
    if dim is None or degree is None:
        raise ValueError("map text lacks the dimension or degree line")
    exps = []
    for fac in factors:
        row = [0] * dim
        for k, e in fac:
            if not 1 <= k <= dim:
                raise ValueError(f"parameter t{k} outside dimension {dim}")
            row[k - 1] = e
        exps.append(tuple(row))
    return MonomialMap(
        varnames=tuple(names),
        dim=dim,
        degree=degree,
        coeffs=tuple(coeffs),
        exponents=tuple(exps),
    )
