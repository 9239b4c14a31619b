"""Tangent-circle sessions graded by plane geometry.

The oracle is the tangency identity itself: a circle at (x, y) with radius
rho is tangent to circle i (sign s_i) exactly when the center distance
equals |rho + s_i * r_i|.  We recompute that distance with math.hypot on
the reported coordinates, so the solver is graded by geometry it never
sees.  One configuration is solved by hand and pinned exactly: for unit
circles centered at (0,0), (4,0), (2,3) the circumcenter is (2, 5/6) at
distance 13/6 from each center, so the inner and outer Soddy circles have
radii 13/6 - 1 = 7/6 and 13/6 + 1 = 19/6.

Structural checks: the reduced systems used internally must reproduce the
zero set of the full quadric formulation, the eight entries must be
invariant (as a set of drawn circles) under relabeling the input circles,
and an equilateral input must produce an output set closed under rotation
by 120 degrees.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from polycont.apollonius import (
    SIGN_VECTORS,
    ApolloniusInput,
    ApolloniusOutput,
    Circle,
    IllPosedError,
    InvalidInputError,
    SessionCache,
    _reduced_system,
    apollonius_solve,
    apollonius_system,
    input_from_floats,
)
from polycont.poly import PolySystem
from polycont.solver import SolverOptions, solve_blackbox

# unit circles with a hand-solved Soddy pair
HAND = [[0.0, 0.0, 1.0], [4.0, 0.0, 1.0], [2.0, 3.0, 1.0]]
# a large circle with two smaller ones drawn inside it: four of the eight
# tangency problems have no real solution
NESTED = [[0.0, 0.0, 4.0], [0.0, 0.5, 1.0], [0.5, -0.5, 1.0]]


def tangency_residual(circles, signs, x, y, rho):
    worst = 0.0
    for (cx, cy, ri), s in zip(circles, signs):
        d = math.hypot(x - cx, y - cy)
        worst = max(worst, abs(d - abs(rho + s * ri)))
    return worst


def system_residual(s: PolySystem, point) -> float:
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


def rendered_sets_match(a, b, tol=1e-6):
    """Two lists of (x, y, radius) agree as sets up to tol."""
    if len(a) != len(b):
        return False
    left = sorted(a)
    right = sorted(b)
    return all(
        max(abs(p - q) for p, q in zip(u, v)) <= tol for u, v in zip(left, right)
    )


@pytest.fixture(scope="module")
def hand_output() -> ApolloniusOutput:
    return apollonius_solve(input_from_floats(HAND))


@pytest.fixture(scope="module")
def nested_output() -> ApolloniusOutput:
    return apollonius_solve(input_from_floats(NESTED))


class TestSystems:
    def test_full_system_matches_direct_formula(self):
        c = input_from_floats(HAND)
        signs = (1, -1, 1)
        s = apollonius_system(c, signs)
        assert s.varnames == ("x", "y", "r")
        assert len(s.polys) == 3
        assert all(p.degree == 2 for p in s.polys)
        rng = np.random.default_rng(7)
        for _ in range(10):
            x, y, r = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            direct = [
                (x - cc.cx) ** 2 + (y - cc.cy) ** 2 - (r + sg * cc.r) ** 2
                for cc, sg in zip(c.circles, signs)
            ]
            for p, want in zip(s.polys, direct):
                acc = 0j
                for term in p.terms:
                    v = term.coeff.to_complex()
                    for z, e in zip((x, y, r), term.exponents):
                        v *= z**e
                    acc += v
                assert abs(acc - want) <= 1e-12 * max(1.0, abs(want))

    def test_reduced_system_solves_full_system(self):
        # the difference rows cancel the quadratic part exactly, so every
        # endpoint of the reduced system must also kill the full quadrics
        c = input_from_floats(HAND)
        for signs in [(1, 1, 1), (1, -1, 1), (-1, -1, -1)]:
            red = _reduced_system(c, signs)
            full = apollonius_system(c, signs)
            rep = solve_blackbox(red, SolverOptions(seed=5))
            assert rep.total_paths == 2  # linear rows cut Bezout 8 -> 2
            assert len(rep.solutions) == 2
            for sol in rep.solutions:
                pt = sol.coords.to_complex()
                assert system_residual(red, pt) <= 1e-8
                assert system_residual(full, pt) <= 1e-8


class TestGeometry:
    def test_eight_entries_in_sign_order(self, hand_output):
        assert len(hand_output.entries) == 8
        assert tuple(e.signs for e in hand_output.entries) == SIGN_VECTORS

    def test_all_real_and_tangent(self, hand_output):
        for e in hand_output.entries:
            assert e.status == "converged"
            assert e.is_real
            assert not e.singular
            res = tangency_residual(HAND, e.signs, e.x.real, e.y.real, e.r.real)
            assert res <= 1e-6, (e.signs, res)

    def test_hand_solved_soddy_circles(self, hand_output):
        by_signs = {e.signs: e for e in hand_output.entries}
        inner = by_signs[(1, 1, 1)]
        outer = by_signs[(-1, -1, -1)]
        for e, rho in ((inner, 7.0 / 6.0), (outer, 19.0 / 6.0)):
            assert abs(e.x.real - 2.0) <= 1e-8
            assert abs(e.y.real - 5.0 / 6.0) <= 1e-8
            assert abs(e.r.real - rho) <= 1e-8
            assert abs(e.x.imag) <= 1e-8 and abs(e.y.imag) <= 1e-8

    def test_rendered_matches_real_entries(self, hand_output, nested_output):
        for out in (hand_output, nested_output):
            drawn = out.rendered()
            assert len(drawn) == sum(e.is_real for e in out.entries)
            for (x, y, rho), e in zip(
                drawn, (e for e in out.entries if e.is_real)
            ):
                assert rho == abs(e.r.real) >= 0.0

    def test_nested_circles_have_complex_witnesses(self, nested_output):
        real = [e for e in nested_output.entries if e.is_real]
        unreal = [e for e in nested_output.entries if not e.is_real]
        assert len(real) == 4 and len(unreal) == 4
        for e in real:
            # the chosen branch may carry a negative real radius; the
            # drawn circle uses its magnitude and tangency must still hold
            res = tangency_residual(NESTED, e.signs, e.x.real, e.y.real, e.r.real)
            assert res <= 1e-6
        for e in unreal:
            assert e.status == "converged"
            scale = max(1.0, abs(e.x), abs(e.y), abs(e.r))
            assert max(abs(e.x.imag), abs(e.y.imag), abs(e.r.imag)) > 1e-6 * scale

    def test_relabeling_leaves_drawn_set_unchanged(self, hand_output):
        base = hand_output.rendered()
        for perm in ((1, 2, 0), (2, 1, 0)):
            shuffled = input_from_floats([HAND[k] for k in perm])
            out = apollonius_solve(shuffled)
            assert rendered_sets_match(base, out.rendered(), tol=1e-6)

    def test_equilateral_output_has_threefold_symmetry(self):
        cfg = [
            [2.0 * math.cos(math.radians(a)), 2.0 * math.sin(math.radians(a)), 1.0]
            for a in (90, 210, 330)
        ]
        out = apollonius_solve(input_from_floats(cfg))
        drawn = out.rendered()
        assert len(drawn) == 8
        ca, sa = math.cos(2.0 * math.pi / 3.0), math.sin(2.0 * math.pi / 3.0)
        for x, y, rho in drawn:
            rx, ry = ca * x - sa * y, sa * x + ca * y
            assert any(
                math.hypot(rx - u, ry - v) <= 1e-8 and abs(rho - w) <= 1e-8
                for u, v, w in drawn
            ), (x, y, rho)
        # the concentric Soddy pair of an equilateral configuration:
        # center distance 2, unit radii, so radii 2 - 1 and 2 + 1
        radii = sorted(w for _, _, w in drawn)
        assert abs(radii[0] - 1.0) <= 1e-8
        assert abs(radii[-1] - 3.0) <= 1e-8


class TestWarmStart:
    def test_small_drag_matches_cold_solve(self):
        cache = SessionCache()
        first = apollonius_solve(input_from_floats(HAND), cache=cache)
        assert not first.warm
        dragged = [list(row) for row in HAND]
        dragged[0][0] += 1e-3
        dragged[0][1] -= 1e-3
        warm = apollonius_solve(
            input_from_floats(dragged), session=first.session, cache=cache
        )
        assert warm.warm
        assert warm.session == first.session
        cold = apollonius_solve(input_from_floats(dragged))
        assert not cold.warm
        for a, b in zip(warm.entries, cold.entries):
            assert a.signs == b.signs
            assert abs(a.x - b.x) <= 1e-6
            assert abs(a.y - b.y) <= 1e-6
            assert abs(a.r - b.r) <= 1e-6
            assert a.is_real == b.is_real
        assert warm.elapsed_ms < cold.elapsed_ms

    def test_identical_replay_returns_cached_output(self):
        cache = SessionCache()
        first = apollonius_solve(input_from_floats(HAND), cache=cache)
        again = apollonius_solve(
            input_from_floats(HAND), session=first.session, cache=cache
        )
        assert again is first

    def test_large_drag_still_correct(self):
        # far outside any contraction basin; the solver may fall back to a
        # cold start per sign system but the answer must not degrade
        cache = SessionCache()
        first = apollonius_solve(input_from_floats(HAND), cache=cache)
        moved = [list(row) for row in HAND]
        moved[2][0] += 2.0
        moved[2][1] += 1.5
        got = apollonius_solve(
            input_from_floats(moved), session=first.session, cache=cache
        )
        fresh = apollonius_solve(input_from_floats(moved))
        for a, b in zip(got.entries, fresh.entries):
            assert abs(a.x - b.x) <= 1e-6
            assert abs(a.y - b.y) <= 1e-6
            assert abs(a.r - b.r) <= 1e-6

    def test_unknown_session_token_solves_cold(self):
        cache = SessionCache()
        out = apollonius_solve(
            input_from_floats(HAND), session="no-such-token", cache=cache
        )
        assert not out.warm
        assert out.session == "no-such-token"
        assert len(cache) == 1

    def test_fresh_token_minted_without_session(self, hand_output):
        assert isinstance(hand_output.session, str)
        assert len(hand_output.session) == 32
        int(hand_output.session, 16)  # hex


class TestSessionCache:
    def make(self, **kw):
        self.now = [0.0]
        kw.setdefault("clock", lambda: self.now[0])
        return SessionCache(**kw)

    def entry(self, tag: float):
        # cache entries are opaque to the cache itself; a stub suffices
        class Stub:
            def __init__(self, tag):
                self.tag = tag
                self.stamp = 0.0

        return Stub(tag)

    def test_put_get_roundtrip(self):
        cache = self.make()
        cache.put("a", self.entry(1.0))
        got = cache.get("a")
        assert got is not None and got.tag == 1.0
        assert len(cache) == 1

    def test_entries_expire_after_ttl(self):
        cache = self.make(ttl_seconds=10.0)
        cache.put("a", self.entry(1.0))
        self.now[0] = 9.9
        assert cache.get("a") is not None
        self.now[0] = 10.1
        assert cache.get("a") is None
        assert len(cache) == 0

    def test_get_does_not_extend_ttl(self):
        cache = self.make(ttl_seconds=10.0)
        cache.put("a", self.entry(1.0))
        self.now[0] = 9.0
        assert cache.get("a") is not None
        self.now[0] = 10.5
        assert cache.get("a") is None

    def test_put_refreshes_stamp(self):
        cache = self.make(ttl_seconds=10.0)
        cache.put("a", self.entry(1.0))
        self.now[0] = 9.0
        cache.put("a", self.entry(2.0))
        self.now[0] = 18.0
        got = cache.get("a")
        assert got is not None and got.tag == 2.0

    def test_least_recently_used_entry_is_evicted(self):
        cache = self.make(maxsize=2)
        cache.put("a", self.entry(1.0))
        cache.put("b", self.entry(2.0))
        assert cache.get("a") is not None  # touch: now b is the oldest
        cache.put("c", self.entry(3.0))
        assert len(cache) == 2
        assert cache.get("b") is None
        assert cache.get("a") is not None
        assert cache.get("c") is not None

    def test_maxsize_validation(self):
        with pytest.raises(ValueError):
            SessionCache(maxsize=0)


class TestValidation:
    def test_rejects_nonpositive_radius(self):
        for bad in (0.0, -1.0):
            with pytest.raises(InvalidInputError):
                input_from_floats([[0, 0, bad], [4, 0, 1], [2, 3, 1]])

    def test_rejects_non_finite_fields(self):
        for bad in (float("nan"), float("inf")):
            with pytest.raises(InvalidInputError):
                input_from_floats([[bad, 0, 1], [4, 0, 1], [2, 3, 1]])

    def test_rejects_wrong_counts_and_shapes(self):
        with pytest.raises(InvalidInputError):
            input_from_floats([[0, 0, 1], [4, 0, 1]])
        with pytest.raises(InvalidInputError):
            input_from_floats([[0, 0, 1]] * 4)
        with pytest.raises(InvalidInputError):
            input_from_floats([[0, 0], [4, 0, 1], [2, 3, 1]])
        with pytest.raises(InvalidInputError):
            input_from_floats([[0, 0, "wide"], [4, 0, 1], [2, 3, 1]])
        with pytest.raises(InvalidInputError):
            ApolloniusInput((Circle(0, 0, 1), Circle(4, 0, 1)))

    def test_identical_circles_are_ill_posed(self):
        same = [[1.0, 2.0, 3.0]] * 3
        with pytest.raises(IllPosedError):
            apollonius_solve(input_from_floats(same))
