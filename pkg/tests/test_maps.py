"""Monomial-map solutions of binomial systems, checked against exact oracles.

Independent oracles used here, written before the assertions:

* Smith normal form: d1 = gcd of all entries, d1*d2 = gcd of all 2x2
  minors, prod(d_i) = |det|.  For [[2,4,4],[-6,6,12],[10,4,16]] that
  gives gcd = 2, minor gcd = 4, det = 624, hence diagonal (2, 2, 156).
  Random matrices are verified with exact Fraction determinants and
  ranks computed by a separate Gaussian elimination below.
* Root extraction: x^3 = 8 has exactly the three points 2*exp(2*pi*i*k/3),
  computed here through cmath, nothing shared with the solver.
* Decompositions by hand: x*y = x*z is the union of the plane x = 0 and
  the plane y = z; x^2*y = x*y is the three lines x = 0, y = 0, x = 1;
  x = 1 together with x = 2 has no solutions at all.
* Substitution: plugging a map into the input system and evaluating at
  random parameter values must give residuals at rounding level, which
  needs no knowledge of how the map was found.
"""

import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycont.maps import (
    MonomialMap,
    NotBinomialError,
    evaluate_map,
    format_map,
    parse_map,
    smith_normal_form,
    solve_binomials,
)
from polycont.poly import Coeff, DimensionMismatchError, Polynomial, PolySystem, parse_system
from polycont.witness import membership_test, witness_solve
from polycont.solver import SolverOptions

TWISTED_CUBIC = "x*y - z; x^2 - y;"


# ---------------------------------------------------------------------------
# exact rational linear algebra, independent of the module under test
# ---------------------------------------------------------------------------


def _det_exact(rows):
    M = [[Fraction(v) for v in r] for r in rows]
    n = len(M)
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if M[i][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        det *= M[col][col]
        for i in range(col + 1, n):
            f = M[i][col] / M[col][col]
            M[i] = [a - f * b for a, b in zip(M[i], M[col])]
    return det


def _rank_exact(rows):
    if not rows:
        return 0
    M = [[Fraction(v) for v in r] for r in rows]
    m, n = len(M), len(M[0])
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, m) if M[i][col]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(m):
            if i != rank and M[i][col]:
                f = M[i][col] / M[rank][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


def _mat_mul(A, B):
    return [
        [sum(a * b for a, b in zip(row, col)) for col in zip(*B)]
        for row in A
    ]


def _system_residual(s: PolySystem, point: np.ndarray) -> float:
    worst = 0.0
    for p in s.polys:
        acc = 0j
        for term in p.terms:
            v = term.coeff.to_complex()
            for z, e in zip(point, term.exponents):
                v *= z**e
            acc += v
        worst = max(worst, abs(acc))
    return worst


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


class TestSmithNormalForm:
    def test_known_matrix(self):
        A = [[2, 4, 4], [-6, 6, 12], [10, 4, 16]]
        diag, U, W = smith_normal_form(A)
        assert diag == [2, 2, 156]
        reduced = _mat_mul(_mat_mul(U, A), W)
        assert reduced == [[2, 0, 0], [0, 2, 0], [0, 0, 156]]

    def test_zero_matrix(self):
        diag, U, W = smith_normal_form([[0, 0], [0, 0]])
        assert diag == [0, 0]
        assert U == [[1, 0], [0, 1]]
        assert W == [[1, 0], [0, 1]]

    def test_single_row(self):
        diag, U, W = smith_normal_form([[6, 10, 15]])
        assert diag == [1]  # gcd(6, 10, 15) = 1

    @settings(max_examples=150, deadline=None)
    @given(
        st.integers(1, 4),
        st.integers(1, 4),
        st.data(),
    )
    def test_random_matrices(self, m, n, data):
        A = [
            [data.draw(st.integers(-9, 9)) for _ in range(n)]
            for _ in range(m)
        ]
        diag, U, W = smith_normal_form(A)
        assert abs(_det_exact(U)) == 1
        assert abs(_det_exact(W)) == 1
        D = _mat_mul(_mat_mul(U, A), W)
        for i in range(m):
            for j in range(n):
                if i == j:
                    assert D[i][j] == (diag[i] if i < len(diag) else 0)
                else:
                    assert D[i][j] == 0
        assert all(d >= 0 for d in diag)
        nz = [d for d in diag if d]
        assert diag == nz + [0] * (len(diag) - len(nz))
        for a, b in zip(nz, nz[1:]):
            assert b % a == 0
        assert len(nz) == _rank_exact(A)


# ---------------------------------------------------------------------------
# the solver
# ---------------------------------------------------------------------------


class TestSolveBinomials:
    def test_twisted_cubic_single_map(self):
        maps = solve_binomials(3, parse_system(TWISTED_CUBIC), puretopdim=True)
        assert len(maps) == 1
        assert format_map(maps[0]) == [
            "x - (1+0j)*t1**1",
            "y - (1+0j)*t1**2",
            "z - (1+0j)*t1**3",
            "dimension = 1",
            "degree = 3",
        ]

    def test_quadratic_roots(self):
        maps = solve_binomials(1, parse_system("x^2 - 1;"), puretopdim=False)
        assert len(maps) == 2
        got = sorted(m.coeffs[0].to_complex().real for m in maps)
        assert got == pytest.approx([-1.0, 1.0], abs=1e-14)
        assert all(abs(m.coeffs[0].to_complex().imag) < 1e-30 for m in maps)

    def test_cubic_roots_match_cmath(self):
        maps = solve_binomials(1, parse_system("x^3 - 8;"), puretopdim=False)
        assert len(maps) == 3
        got = sorted(
            (m.coeffs[0].to_complex() for m in maps), key=cmath.phase
        )
        exact = sorted(
            (2 * cmath.exp(2j * cmath.pi * k / 3) for k in range(3)),
            key=cmath.phase,
        )
        assert max(abs(a - b) for a, b in zip(got, exact)) < 1e-14
        assert all(m.dim == 0 and m.degree == 0 for m in maps)

    def test_coset_count_is_product_of_elementary_divisors(self):
        maps = solve_binomials(
            2, parse_system("x^4 - 1; y^6 - 1;"), puretopdim=False
        )
        assert len(maps) == 24
        pts = {
            (round(m.coeffs[0].to_complex().real, 9),
             round(m.coeffs[0].to_complex().imag, 9),
             round(m.coeffs[1].to_complex().real, 9),
             round(m.coeffs[1].to_complex().imag, 9))
            for m in maps
        }
        assert len(pts) == 24  # all cosets distinct

    def test_scaled_coefficients_substitute_to_zero(self):
        s = parse_system("2*x*y - 3*z; 5*x^2 - 7*y;")
        maps = solve_binomials(3, s, puretopdim=True)
        assert len(maps) == 1
        for tv in [(0.37 + 0.21j,), (-0.9 + 0.43j,), (1.1 - 0.2j,)]:
            pt = evaluate_map(maps[0], tv)
            assert _system_residual(s, pt) < 1e-12

    def test_line_through_origin(self):
        maps = solve_binomials(2, parse_system("x - y;"), puretopdim=True)
        assert len(maps) == 1
        assert format_map(maps[0])[:2] == [
            "x - (1+0j)*t1**1",
            "y - (1+0j)*t1**1",
        ]
        assert maps[0].dim == 1

    def test_puretopdim_filters_embedded_origin(self):
        everything = solve_binomials(2, parse_system("x - y;"), puretopdim=False)
        assert sorted(m.dim for m in everything) == [0, 1]
        top = solve_binomials(2, parse_system("x - y;"), puretopdim=True)
        assert [m.dim for m in top] == [1]

    def test_two_plane_decomposition(self):
        maps = solve_binomials(3, parse_system("x*y - x*z;"), puretopdim=True)
        assert len(maps) == 2
        assert all(m.dim == 2 for m in maps)
        zeroed = sorted(
            tuple(
                name
                for name, c in zip(m.varnames, m.coeffs)
                if c.to_complex() == 0
            )
            for m in maps
        )
        assert zeroed == [(), ("x",)]
        s = parse_system("x*y - x*z;")
        for m in maps:
            pt = evaluate_map(m, (0.4 - 0.8j, -1.2 + 0.3j))
            assert _system_residual(s, pt) < 1e-14

    def test_three_line_decomposition(self):
        s = parse_system("x^2*y - x*y;")
        maps = solve_binomials(2, s, puretopdim=True)
        assert len(maps) == 3
        assert all(m.dim == 1 for m in maps)
        descriptions = set()
        for m in maps:
            cx, cy = (c.to_complex() for c in m.coeffs)
            ex, ey = m.exponents
            if cx == 0:
                descriptions.add("x=0")
            elif cy == 0:
                descriptions.add("y=0")
            else:
                assert cx == 1 and ex == (0,)
                descriptions.add("x=1")
        assert descriptions == {"x=0", "y=0", "x=1"}

    def test_inconsistent_system_has_no_maps(self):
        assert solve_binomials(1, parse_system("x - 1; x - 2;"), puretopdim=False) == []

    def test_negative_exponent_on_hyperbola(self):
        maps = solve_binomials(2, parse_system("x*y - 1;"), puretopdim=False)
        assert len(maps) == 1
        (m,) = maps
        assert sorted(sum(row) for row in m.exponents) == [-1, 1]
        assert m.domain_note == "nonzero parameters required: t1"
        pt = evaluate_map(m, (0.3 + 0.4j,))
        assert abs(pt[0] * pt[1] - 1) < 1e-14

    def test_nonnegative_maps_have_empty_domain_note(self):
        maps = solve_binomials(3, parse_system(TWISTED_CUBIC), puretopdim=True)
        assert maps[0].domain_note == ""

    def test_rejects_non_binomials(self):
        with pytest.raises(NotBinomialError):
            solve_binomials(2, parse_system("x + y - 1;"), puretopdim=True)
        with pytest.raises(NotBinomialError):
            solve_binomials(1, parse_system("x^2;"), puretopdim=True)

    def test_rejects_wrong_variable_count(self):
        with pytest.raises(DimensionMismatchError):
            solve_binomials(2, parse_system(TWISTED_CUBIC), puretopdim=True)

    def test_dimension_equals_rank_deficiency(self):
        cases = [
            (TWISTED_CUBIC, 3),
            ("x*y - z; y^2 - x;", 3),
            ("x^2*y^3 - z; x - y;", 3),
        ]
        for txt, nv in cases:
            s = parse_system(txt)
            rows = [
                tuple(
                    a - b
                    for a, b in zip(p.terms[0].exponents, p.terms[1].exponents)
                )
                for p in s.polys
            ]
            expected = nv - _rank_exact(rows)
            maps = solve_binomials(nv, s, puretopdim=True)
            assert maps and all(m.dim == expected for m in maps)

    def test_deterministic(self):
        s = parse_system("3*x^2*y - 5*z^3; 2*y^2 - 7*x*z;")
        one = [format_map(m) for m in solve_binomials(3, s, puretopdim=False)]
        two = [format_map(m) for m in solve_binomials(3, s, puretopdim=False)]
        assert one == two
        for m in solve_binomials(3, s, puretopdim=False):
            pt = evaluate_map(m, tuple([0.8 - 0.5j] * m.dim))
            assert _system_residual(s, pt) < 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_random_binomials_substitute_to_zero(self, data):
        nv = data.draw(st.integers(1, 3))
        neq = data.draw(st.integers(1, min(nv, 2)))
        exps = st.tuples(*[st.integers(0, 3)] * nv)
        coeff = st.complex_numbers(
            min_magnitude=0.25, max_magnitude=4, allow_infinity=False, allow_nan=False
        )
        polys = []
        rows = []
        for _ in range(neq):
            e1 = data.draw(exps)
            e2 = data.draw(exps.filter(lambda e, e1=e1: e != e1))
            c1 = data.draw(coeff)
            c2 = data.draw(coeff)
            polys.append(
                Polynomial.from_dict(
                    {e1: Coeff.from_complex(c1), e2: Coeff.from_complex(c2)}, nv
                )
            )
            rows.append(tuple(a - b for a, b in zip(e1, e2)))
        names = tuple("xyz"[:nv])
        s = PolySystem(tuple(polys), names)
        maps = solve_binomials(nv, s, puretopdim=False)
        rng = np.random.default_rng(7)
        for m in maps:
            if all(c.to_complex() != 0 for c in m.coeffs):
                assert m.dim == nv - _rank_exact(rows)
            for _ in range(3):
                t = tuple(
                    complex(*rng.uniform(0.5, 1.2, 2)) for _ in range(m.dim)
                )
                pt = evaluate_map(m, t)
                deg = max(p.degree for p in s.polys)
                scale = max(1.0, float(np.max(np.abs(pt))) ** max(1, deg))
                assert _system_residual(s, pt) <= 1e-12 * scale


# ---------------------------------------------------------------------------
# printed form
# ---------------------------------------------------------------------------


class TestMapText:
    def test_point_map_has_no_parameter_factors(self):
        maps = solve_binomials(1, parse_system("x^2 - 1;"), puretopdim=False)
        texts = sorted(format_map(m)[0] for m in maps)
        assert texts[1] == "x - (1+0j)"
        assert texts[1].count("t1") == 0
        assert format_map(maps[0])[1:] == ["dimension = 0", "degree = 0"]

    def test_roundtrip_exact_on_unit_coefficients(self):
        (m,) = solve_binomials(3, parse_system(TWISTED_CUBIC), puretopdim=True)
        back = parse_map(format_map(m))
        assert back.varnames == m.varnames
        assert back.dim == m.dim
        assert back.degree == m.degree
        assert back.exponents == m.exponents
        assert [c.to_complex() for c in back.coeffs] == [
            c.to_complex() for c in m.coeffs
        ]
        assert format_map(back) == format_map(m)

    def test_roundtrip_with_negative_exponents_and_zeros(self):
        (m,) = solve_binomials(2, parse_system("x*y - 1;"), puretopdim=False)
        assert format_map(parse_map(format_map(m))) == format_map(m)
        maps = solve_binomials(2, parse_system("x - y;"), puretopdim=False)
        for m in maps:
            assert format_map(parse_map(format_map(m))) == format_map(m)

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_map(["x - (1+0j)*t1**1"])  # no dimension/degree lines
        with pytest.raises(ValueError):
            parse_map(["?? nonsense", "dimension = 1", "degree = 1"])
        with pytest.raises(ValueError):
            # parameter index above the declared dimension
            parse_map(["x - (1+0j)*t2**1", "dimension = 1", "degree = 1"])


# ---------------------------------------------------------------------------
# agreement with the witness machinery
# ---------------------------------------------------------------------------


class TestAgainstWitnessSets:
    def test_map_samples_pass_membership(self):
        s = parse_system(TWISTED_CUBIC)
        (m,) = solve_binomials(3, s, puretopdim=True)
        w = witness_solve(s, 1, SolverOptions(seed=13))
        opts = SolverOptions(seed=13)
        for tv in [(0.7 + 0.4j,), (-0.5 + 0.9j,)]:
            pt = evaluate_map(m, tv)
            assert membership_test(w, pt, opts)
        off = np.array([0.7 + 0.4j, 2.0, -1.0])
        assert not membership_test(w, off, opts)
