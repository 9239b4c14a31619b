"""Sparse multivariate polynomials over complex coefficients.

Systems are written in the usual semicolon-terminated text form::

    # a comment
    2
    x^2*y^2 + 2*x - 1;
    x^2*y^2 - 3*y + 1;

The optional leading header line carries the equation count (and optionally
the variable count).  Identifiers are [A-Za-z][A-Za-z0-9_]*; ``i`` and ``j``
are reserved for the imaginary unit, so ``(0.5 + 2*i)`` style complex
literals work anywhere a number does.  Exponentiation is ``^`` or ``**``
with non-negative integer exponents.

Parsing evaluates the expression tree with exact rational coefficient
arithmetic and freezes the result to quad-double coefficients; evaluation
then rounds coefficients down to the requested working precision.  The
formatter emits the shortest decimal that parses back to the identical
quad-double value, so format -> parse is the identity on systems.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .linalg import ComplexMatrix, ComplexVector, XCArr, c_add, c_mul
from .xnum import (
    ExtendedComplex,
    ExtendedReal,
    Precision,
    x_from_fraction,
    x_mul,
    x_to_fraction,
)

QD_LIMBS = 4


class ParseError(ValueError):
    """Input text is not a valid polynomial system; carries a position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class UndeclaredVariableError(ParseError):
    """More variables appear than the explicit header declared."""


class DimensionMismatchError(ValueError):
    """A point's length does not match the system's variable count."""


# ---------------------------------------------------------------------------
# coefficients: exact rational pair during construction, QD limbs at rest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Coeff:
    """Complex coefficient stored as two quad-double limb tuples."""

    re: tuple
    im: tuple

    @classmethod
    def from_fractions(cls, re: Fraction, im: Fraction = Fraction(0)) -> "Coeff":
        return cls(x_from_fraction(re, QD_LIMBS), x_from_fraction(im, QD_LIMBS))

    @classmethod
    def from_complex(cls, z: complex) -> "Coeff":
        return cls.from_fractions(Fraction(float(z.real)), Fraction(float(z.imag)))

    def to_fractions(self) -> Tuple[Fraction, Fraction]:
        return x_to_fraction(self.re), x_to_fraction(self.im)

    def to_complex(self) -> complex:
        re, im = self.to_fractions()
        return complex(float(re), float(im))

    def to_extended(self) -> ExtendedComplex:
        return ExtendedComplex(
            ExtendedReal(tuple(float(c) for c in self.re)),
            ExtendedReal(tuple(float(c) for c in self.im)),
        )

    def is_zero(self) -> bool:
        return all(float(c) == 0.0 for c in self.re) and all(float(c) == 0.0 for c in self.im)


@dataclass(frozen=True)
class Monomial:
    """One term: coefficient times a product of variable powers."""

    coeff: Coeff
    exponents: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return int(sum(self.exponents))


def _term_sort_key(exps: Tuple[int, ...]):
    return (-sum(exps), tuple(-e for e in exps))


@dataclass(frozen=True)
class Polynomial:
    """Sparse polynomial; terms are held in graded-descending order."""

    terms: Tuple[Monomial, ...]
    nvars: int

    @classmethod
    def from_dict(cls, d: Dict[Tuple[int, ...], Coeff], nvars: int) -> "Polynomial":
        items = [(e, c) for e, c in d.items() if not c.is_zero()]
        items.sort(key=lambda item: _term_sort_key(item[0]))
        return cls(tuple(Monomial(c, tuple(int(x) for x in e)) for e, c in items), nvars)

    @property
    def degree(self) -> int:
        return max((m.degree for m in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def support(self) -> frozenset:
        return frozenset(m.exponents for m in self.terms)


@dataclass(frozen=True)
class PolySystem:
    """A list of polynomials sharing one ordered variable set."""

    polys: Tuple[Polynomial, ...]
    varnames: Tuple[str, ...]

    def __post_init__(self):
        for p in self.polys:
            if p.nvars != len(self.varnames):
                raise DimensionMismatchError(
                    f"polynomial over {p.nvars} variables in a system with "
                    f"{len(self.varnames)}"
                )

    @property
    def neq(self) -> int:
        return len(self.polys)

    @property
    def nvars(self) -> int:
        return len(self.varnames)

    def is_square(self) -> bool:
        return self.neq == self.nvars

    @cached_property
    def plan(self) -> "EvalPlan":
        return EvalPlan(self)

    def __getstate__(self):
        return {"polys": self.polys, "varnames": self.varnames}

    def __setstate__(self, state):
        object.__setattr__(self, "polys", state["polys"])
        object.__setattr__(self, "varnames", state["varnames"])


def degrees(s: PolySystem) -> Tuple[int, ...]:
    """Total degree of each polynomial, in system order."""
    return tuple(p.degree for p in s.polys)


def total_degree(s: PolySystem) -> int:
    """Bezout number: the product of the polynomial degrees."""
    out = 1
    for d in degrees(s):
        out *= d
    return out


# ---------------------------------------------------------------------------
# tokenizer / parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z][A-Za-z0-9_]*)
  | (?P<pow>\*\*|\^)
  | (?P<op>[-+*();])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        raw = m.group(0)
        if kind not in ("ws", "comment"):
            tok_kind = "pow" if kind == "pow" else kind
            tokens.append(_Token(tok_kind, raw, line, col))
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    tokens.append(_Token("end", "", line, col))
    return tokens


class _FracPoly:
    """Polynomial with exact (Fraction, Fraction) complex coefficients keyed
    by exponent dicts over variable indices; used only while parsing."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms or {}

    @classmethod
    def const(cls, re: Fraction, im: Fraction = Fraction(0)):
        return cls({(): (re, im)}) if re or im else cls({})

    @classmethod
    def var(cls, index: int):
        return cls({((index, 1),): (Fraction(1), Fraction(0))})

    def _merged(self, other, sign=1):
        out = dict(self.terms)
        for e, (re, im) in other.terms.items():
            r0, i0 = out.get(e, (Fraction(0), Fraction(0)))
            r, iv = r0 + sign * re, i0 + sign * im
            if r or iv:
                out[e] = (r, iv)
            elif e in out:
                del out[e]
        return _FracPoly(out)

    def __add__(self, other):
        return self._merged(other, 1)

    def __sub__(self, other):
        return self._merged(other, -1)

    def __neg__(self):
        return _FracPoly({e: (-re, -im) for e, (re, im) in self.terms.items()})

    def __mul__(self, other):
        out: Dict[tuple, tuple] = {}
        for e1, (r1, i1) in self.terms.items():
            d1 = dict(e1)
            for e2, (r2, i2) in other.terms.items():
                d = dict(d1)
                for v, p in e2:
                    d[v] = d.get(v, 0) + p
                key = tuple(sorted(d.items()))
                re = r1 * r2 - i1 * i2
                im = r1 * i2 + i1 * r2
                r0, i0 = out.get(key, (Fraction(0), Fraction(0)))
                r, iv = r0 + re, i0 + im
                if r or iv:
                    out[key] = (r, iv)
                elif key in out:
                    del out[key]
        return _FracPoly(out)

    def pow(self, n: int):
        result = _FracPoly.const(Fraction(1))
        base = self
        while n > 0:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result


class _Parser:
    def __init__(self, tokens: List[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.varnames: List[str] = []
        self.varindex: Dict[str, int] = {}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str = None) -> _Token:
        tok = self.take()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise ParseError(f"expected {want!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def fail(self, msg: str):
        tok = self.peek()
        raise ParseError(msg, tok.line, tok.col)

    # expression grammar: expr := ['+'|'-'] term (('+'|'-') term)*
    #                     term := factor ('*' factor)*
    #                     factor := atom [('^'|'**') integer]
    #                     atom := number | name | '(' expr ')'
    def expr(self) -> _FracPoly:
        tok = self.peek()
        negate = False
        if tok.kind == "op" and tok.text in "+-":
            self.take()
            negate = tok.text == "-"
        acc = self.term()
        if negate:
            acc = -acc
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.take()
                rhs = self.term()
                acc = acc - rhs if tok.text == "-" else acc + rhs
            else:
                return acc

    def term(self) -> _FracPoly:
        acc = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text == "*":
                self.take()
                acc = acc * self.factor()
            else:
                return acc

    def factor(self) -> _FracPoly:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "pow":
            self.take()
            sign = 1
            t2 = self.peek()
            if t2.kind == "op" and t2.text in "+-":
                self.take()
                sign = -1 if t2.text == "-" else 1
            num = self.expect("number")
            if "." in num.text or "e" in num.text or "E" in num.text:
                raise ParseError("exponent must be an integer", num.line, num.col)
            if sign < 0:
                raise ParseError("negative exponents are not polynomial", num.line, num.col)
            return base.pow(int(num.text))
        return base

    def atom(self) -> _FracPoly:
        tok = self.take()
        if tok.kind == "number":
            return _FracPoly.const(Fraction(tok.text))
        if tok.kind == "name":
            if tok.text in ("i", "j"):
                return _FracPoly.const(Fraction(0), Fraction(1))
            if tok.text not in self.varindex:
                self.varindex[tok.text] = len(self.varnames)
                self.varnames.append(tok.text)
            return _FracPoly.var(self.varindex[tok.text])
        if tok.kind == "op" and tok.text == "(":
            inner = self.expr()
            self.expect("op", ")")
            return inner
        if tok.kind == "op" and tok.text == "-":
            return -self.atom()
        if tok.kind == "op" and tok.text == "+":
            return self.atom()
        raise ParseError(f"unexpected token {tok.text!r}", tok.line, tok.col)


def _detect_header(tokens: List[_Token]):
    """Leading line of one or two bare integers = (neq[, nvars]) header."""
    nums = []
    k = 0
    first_line = tokens[0].line if tokens else 1
    while k < len(tokens) and tokens[k].kind == "number" and tokens[k].line == first_line:
        if "." in tokens[k].text or "e" in tokens[k].text.lower():
            return None, 0
        nums.append(int(tokens[k].text))
        k += 1
    if not nums or len(nums) > 2:
        return None, 0
    if k < len(tokens) and tokens[k].line == first_line and tokens[k].kind != "end":
        return None, 0  # more than numbers on the line: not a header
    return tuple(nums), k


def parse_system(text: str) -> PolySystem:
    """Parse semicolon-terminated polynomials into a PolySystem.

    Raises ParseError (with line/column) on malformed input and
    UndeclaredVariableError when a header's variable count is exceeded.
    """
    tokens = _tokenize(text)
    header, skip = _detect_header(tokens)
    parser = _Parser(tokens)
    parser.pos = skip
    polys: List[_FracPoly] = []
    while parser.peek().kind != "end":
        poly = parser.expr()
        tok = parser.peek()
        if not (tok.kind == "op" and tok.text == ";"):
            raise ParseError(
                f"expected ';' to end the polynomial, found {tok.text!r}", tok.line, tok.col
            )
        parser.take()
        polys.append(poly)
    if not polys:
        raise ParseError("no polynomials found", 1, 1)
    nvars = len(parser.varnames)
    if header:
        if header[0] != len(polys):
            raise ParseError(
                f"header declares {header[0]} equations, found {len(polys)}", 1, 1
            )
        if len(header) == 2:
            if nvars > header[1]:
                extra = parser.varnames[header[1]:]
                raise UndeclaredVariableError(
                    f"header declares {header[1]} variables; also found {extra}", 1, 1
                )
    out = []
    for fp in polys:
        d = {}
        for e, (re, im) in fp.terms.items():
            exps = [0] * nvars
            for v, p in e:
                exps[v] = p
            d[tuple(exps)] = Coeff.from_fractions(re, im)
        out.append(Polynomial.from_dict(d, nvars))
    return PolySystem(tuple(out), tuple(parser.varnames))


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------


def _fraction_to_decimal_str(f: Fraction, digits: int) -> str:
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(f.numerator) / Decimal(f.denominator)
    s = format(d, "E") if (d != 0 and (abs(d.adjusted()) > 16)) else format(d, "f")
    if "." in s and "E" not in s:
        s = s.rstrip("0").rstrip(".")
    if "E" in s:
        mant, exp = s.split("E")
        if "." in mant:
            mant = mant.rstrip("0").rstrip(".")
        s = mant + "E" + exp
    return s or "0"


def _format_real(limbs: tuple) -> str:
    """Shortest decimal that parses back to the same QD value."""
    f = x_to_fraction(limbs)
    if f == 0:
        return "0"
    if f.denominator == 1 and abs(f.numerator) < 2**63:
        return str(f.numerator)
    for digits in (17, 34, 51, 68, 80, 120, 200, 340):
        s = _fraction_to_decimal_str(f, digits)
        if x_from_fraction(Fraction(s.replace("E", "e")), QD_LIMBS) == tuple(limbs):
            return s
    return _fraction_to_decimal_str(f, 400)


def _format_coeff(c: Coeff):
    """Returns (text, sign, is_unit_real) for use while joining terms."""
    re_f, im_f = c.to_fractions()
    if im_f == 0:
        if re_f < 0:
            return _format_real(tuple(-np.float64(v) for v in c.re)), "-", abs(re_f) == 1
        return _format_real(c.re), "+", re_f == 1
    re_s = _format_real(c.re)
    if im_f < 0:
        im_s = _format_real(tuple(-np.float64(v) for v in c.im))
        return f"({re_s} - {im_s}*i)", "+", False
    im_s = _format_real(c.im)
    return f"({re_s} + {im_s}*i)", "+", False


def format_polynomial(p: Polynomial, varnames: Sequence[str]) -> str:
    if p.is_zero():
        return "0"
    pieces: List[str] = []
    for k, m in enumerate(p.terms):
        text, sign, unit = _format_coeff(m.coeff)
        powers = [
            name if e == 1 else f"{name}^{e}"
            for name, e in zip(varnames, m.exponents)
            if e > 0
        ]
        if powers and unit:
            body = "*".join(powers)
        elif powers:
            body = text + "*" + "*".join(powers)
        else:
            body = text
        if k == 0:
            pieces.append(("-" if sign == "-" else "") + body)
        else:
            pieces.append(("- " if sign == "-" else "+ ") + body)
    return " ".join(pieces)


def format_system(s: PolySystem, header: bool = True) -> str:
    """Render a system in the text format parse_system reads back."""
    lines = []
    if header:
        if s.neq == s.nvars:
            lines.append(str(s.neq))
        else:
            lines.append(f"{s.neq} {s.nvars}")
    for p in s.polys:
        lines.append(format_polynomial(p, s.varnames) + ";")
    return "\n".join(lines) + "\n"


def read_system(path) -> PolySystem:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_system(fh.read())


def write_system(path, s: PolySystem) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_system(s))


# ---------------------------------------------------------------------------
# evaluation plans
# ---------------------------------------------------------------------------


def _pad_width(w: int) -> int:
    out = 1
    while out < w:
        out *= 2
    return max(out, 1)


class EvalPlan:
    """Precomputed flat-term structure for fast evaluation and Jacobians.

    Terms are gathered through a power table (one row per variable, one
    column per exponent), multiplied by per-precision coefficient arrays and
    summed per equation through a padded index matrix (the pad points at a
    trailing zero slot), so the same index structure drives both the
    complex128 fast path and the limb-tuple path.
    """

    def __init__(self, system: PolySystem):
        n = system.nvars
        self.nvars = n
        self.neq = system.neq
        exps: List[Tuple[int, ...]] = []
        coeffs: List[Coeff] = []
        row_of: List[List[int]] = [[] for _ in range(system.neq)]
        for i, p in enumerate(system.polys):
            for m in p.terms:
                row_of[i].append(len(exps))
                exps.append(m.exponents)
                coeffs.append(m.coeff)
        self.nterms = len(exps)
        self.exps = np.asarray(exps, dtype=np.int64).reshape(self.nterms, n)
        self.maxdeg = int(self.exps.max()) if self.nterms else 0
        w = _pad_width(max((len(r) for r in row_of), default=1))
        gather = np.full((system.neq, w), self.nterms, dtype=np.int64)
        for i, r in enumerate(row_of):
            gather[i, : len(r)] = r
        self.sys_gather = gather

        # jacobian terms: d(term)/d(var) for every nonzero exponent
        jexps: List[np.ndarray] = []
        jcoeff_scale: List[int] = []
        jparent: List[int] = []
        jcell: List[List[int]] = [[] for _ in range(system.neq * n)]
        owner = np.empty(self.nterms, dtype=np.int64)
        for i, r in enumerate(row_of):
            for t in r:
                owner[t] = i
        for t in range(self.nterms):
            e = self.exps[t]
            for v in range(n):
                if e[v] > 0:
                    de = e.copy()
                    de[v] -= 1
                    jcell[owner[t] * n + v].append(len(jexps))
                    jexps.append(de)
                    jcoeff_scale.append(int(e[v]))
                    jparent.append(t)
        self.jn = len(jexps)
        self.jexps = (
            np.asarray(jexps, dtype=np.int64).reshape(self.jn, n)
            if self.jn
            else np.zeros((0, n), dtype=np.int64)
        )
        self.jscale = np.asarray(jcoeff_scale, dtype=np.float64)
        self.jparent = np.asarray(jparent, dtype=np.int64)
        wj = _pad_width(max((len(c) for c in jcell), default=1))
        jgather = np.full((system.neq * n, wj), self.jn, dtype=np.int64)
        for k, cell in enumerate(jcell):
            jgather[k, : len(cell)] = cell
        self.jac_gather = jgather

        self._coeff_cache: Dict[int, tuple] = {}
        self._qd_re = np.array(
            [[float(c) for c in co.re] for co in coeffs], dtype=np.float64
        ).reshape(self.nterms, QD_LIMBS)
        self._qd_im = np.array(
            [[float(c) for c in co.im] for co in coeffs], dtype=np.float64
        ).reshape(self.nterms, QD_LIMBS)
        self._var_range = np.arange(n, dtype=np.int64)

    # -- coefficient arrays at a working precision (truncated from QD) -----

    def coeffs_d(self):
        cached = self._coeff_cache.get("d")
        if cached is None:
            cd = self._qd_re[:, 0] + 1j * self._qd_im[:, 0]
            jc = cd[self.jparent] * self.jscale if self.jn else np.zeros(0, np.complex128)
            cached = (cd, jc)
            self._coeff_cache["d"] = cached
        return cached

    def coeffs_x(self, limbs: int):
        cached = self._coeff_cache.get(limbs)
        if cached is None:
            sys_c = XCArr(
                tuple(self._qd_re[:, l].copy() for l in range(limbs)),
                tuple(self._qd_im[:, l].copy() for l in range(limbs)),
            )
            if self.jn:
                scale = tuple(
                    self.jscale if l == 0 else np.zeros_like(self.jscale)
                    for l in range(limbs)
                )
                base = sys_c[self.jparent]
                jac_c = XCArr(x_mul(base.re, scale), x_mul(base.im, scale))
            else:
                jac_c = XCArr.zeros((0,), limbs)
            cached = (sys_c, jac_c)
            self._coeff_cache[limbs] = cached
        return cached

    # Evaluation accepts any leading batch shape: x is (..., nvars) and all
    # gathers/reductions act on the trailing axes, so one path point and a
    # block of path points go through identical code.

    # -- double precision fast path ----------------------------------------

    def power_table_d(self, x: np.ndarray) -> np.ndarray:
        pw = np.empty(x.shape + (self.maxdeg + 1,), dtype=np.complex128)
        pw[..., 0] = 1.0
        for d in range(1, self.maxdeg + 1):
            np.multiply(pw[..., d - 1], x, out=pw[..., d])
        return pw

    def term_values_d(self, pw: np.ndarray, exps: np.ndarray) -> np.ndarray:
        if exps.shape[0] == 0:
            return np.zeros(pw.shape[:-2] + (0,), dtype=np.complex128)
        return np.prod(pw[..., self._var_range[None, :], exps], axis=-1)

    def eval_d(self, x: np.ndarray, pw: np.ndarray = None) -> np.ndarray:
        cd, _ = self.coeffs_d()
        if pw is None:
            pw = self.power_table_d(x)
        tv = self.term_values_d(pw, self.exps) * cd
        ext = _zero_padded_d(tv)
        return ext[..., self.sys_gather].sum(axis=-1)

    def eval_and_jac_d(self, x: np.ndarray):
        cd, jc = self.coeffs_d()
        pw = self.power_table_d(x)
        tv = self.term_values_d(pw, self.exps) * cd
        vals = _zero_padded_d(tv)[..., self.sys_gather].sum(axis=-1)
        jtv = self.term_values_d(pw, self.jexps) * jc
        jflat = _zero_padded_d(jtv)[..., self.jac_gather].sum(axis=-1)
        jac = jflat.reshape(jflat.shape[:-1] + (self.neq, self.nvars))
        return vals, jac

    # -- limb path (all precisions; one limb = plain doubles) ---------------

    def power_table_x(self, x: XCArr) -> XCArr:
        limbs = x.limbs
        pw = XCArr.zeros(x.shape + (self.maxdeg + 1,), limbs)
        col = XCArr.from_complex(np.ones(x.shape), limbs)
        pw.put((Ellipsis, 0), col)
        for d in range(1, self.maxdeg + 1):
            col = c_mul(col, x)
            pw.put((Ellipsis, d), col)
        return pw

    def term_values_x(self, pw: XCArr, exps: np.ndarray) -> XCArr:
        nt = exps.shape[0]
        if nt == 0:
            return XCArr.zeros(pw.shape[:-2] + (0,), pw.limbs)
        acc = pw[(Ellipsis, self._var_range[0], exps[:, 0])]
        for v in range(1, self.nvars):
            acc = c_mul(acc, pw[(Ellipsis, self._var_range[v], exps[:, v])])
        return acc

    def _reduce_rows(self, vals_ext: XCArr, gather: np.ndarray) -> XCArr:
        grid = vals_ext[(Ellipsis, gather)]
        w = gather.shape[1]
        while w > 1:
            half = w // 2
            grid = c_add(grid[(Ellipsis, slice(None, half))], grid[(Ellipsis, slice(half, None))])
            w = half
        return grid[(Ellipsis, 0)]

    def eval_x(self, x: XCArr, pw: XCArr = None) -> XCArr:
        sys_c, _ = self.coeffs_x(x.limbs)
        if pw is None:
            pw = self.power_table_x(x)
        tv = c_mul(self.term_values_x(pw, self.exps), sys_c)
        return self._reduce_rows(_append_zero(tv), self.sys_gather)

    def eval_and_jac_x(self, x: XCArr):
        sys_c, jac_c = self.coeffs_x(x.limbs)
        pw = self.power_table_x(x)
        tv = c_mul(self.term_values_x(pw, self.exps), sys_c)
        vals = self._reduce_rows(_append_zero(tv), self.sys_gather)
        jtv = c_mul(self.term_values_x(pw, self.jexps), jac_c)
        jflat = self._reduce_rows(_append_zero(jtv), self.jac_gather)
        jac = jflat.reshape(jflat.shape[:-1] + (self.neq, self.nvars))
        return vals, jac

    # -- evaluation magnitude (plain doubles at every precision) -------------

    def mag_d(self, absx: np.ndarray) -> np.ndarray:
        """Per-equation magnitude scale: sum_j |c_j| * prod_k |x_k|^e_jk.

        Evaluating the polynomial with every coefficient and coordinate
        replaced by its modulus bounds the size of the intermediate terms,
        which is the natural yardstick for rounding noise in the value.
        Fixed reduction trees (sequential factor products, halving sums)
        keep each row's result independent of the batch it rides in.
        """
        cd, _ = self.coeffs_d()
        pw = np.empty(absx.shape + (self.maxdeg + 1,), dtype=np.float64)
        pw[..., 0] = 1.0
        for d in range(1, self.maxdeg + 1):
            np.multiply(pw[..., d - 1], absx, out=pw[..., d])
        if self.nterms == 0:
            tv = np.zeros(absx.shape[:-1] + (0,), dtype=np.float64)
        else:
            tv = pw[..., self._var_range[0], self.exps[:, 0]].copy()
            for v in range(1, self.nvars):
                tv *= pw[..., self._var_range[v], self.exps[:, v]]
            tv *= np.abs(cd)
        ext = np.concatenate(
            [tv, np.zeros(tv.shape[:-1] + (1,), dtype=np.float64)], axis=-1
        )
        grid = ext[..., self.sys_gather]
        w = self.sys_gather.shape[1]
        while w > 1:
            half = w // 2
            grid = grid[..., :half] + grid[..., half:]
            w = half
        return grid[..., 0]


def _zero_padded_d(a: np.ndarray) -> np.ndarray:
    pad = np.zeros(a.shape[:-1] + (1,), dtype=a.dtype)
    return np.concatenate([a, pad], axis=-1)


def _append_zero(a: XCArr) -> XCArr:
    def ext(c):
        pad = np.zeros(c.shape[:-1] + (1,), dtype=np.float64)
        return np.concatenate([c, pad], axis=-1)

    return XCArr(tuple(ext(c) for c in a.re), tuple(ext(c) for c in a.im))


# ---------------------------------------------------------------------------
# public evaluation ops
# ---------------------------------------------------------------------------


def _point_to_backend(s: PolySystem, point, precision: Precision):
    if isinstance(point, ComplexVector):
        precision = point.precision
        data = point.data
        if data.shape[0] != s.nvars:
            raise DimensionMismatchError(
                f"point has {data.shape[0]} coordinates, system has {s.nvars} variables"
            )
        return data, precision
    arr = np.asarray(list(point), dtype=np.complex128)
    if arr.shape != (s.nvars,):
        raise DimensionMismatchError(
            f"point has shape {arr.shape}, system has {s.nvars} variables"
        )
    return XCArr.from_complex(arr, precision.limbs), precision


def evaluate(s: PolySystem, point, precision: Precision = Precision.D) -> ComplexVector:
    """Evaluate every polynomial at the point, at the point's precision."""
    data, precision = _point_to_backend(s, point, precision)
    if precision is Precision.D:
        vals = s.plan.eval_d(data.to_complex())
        return ComplexVector(XCArr.from_complex(vals, 1), Precision.D)
    return ComplexVector(s.plan.eval_x(data), precision)


def jacobian(s: PolySystem, point, precision: Precision = Precision.D) -> ComplexMatrix:
    """Matrix of first partial derivatives at the point."""
    data, precision = _point_to_backend(s, point, precision)
    if precision is Precision.D:
        _, jac = s.plan.eval_and_jac_d(data.to_complex())
        return ComplexMatrix(XCArr.from_complex(jac, 1), Precision.D)
    _, jac = s.plan.eval_and_jac_x(data)
    return ComplexMatrix(jac, precision)
