"""Electrical-network tests.

Core claims:
    - pairwise resistance equals tree distance (closed form and solve)
    - boundary resistance matches series/parallel formulas on paths
    - the occupation-density route and the Dirichlet solve give the same
      expected exit time
    - the 1D centered exit time is exactly (m+1)^2
    - monotonicity in the region and the resistance triangle bound hold
    - the fused pair resistance never exceeds the distance and converges
      to it as the boundary recedes
"""

import numpy as np
import pytest

from combwalk import graph as g
from combwalk import resistance as rs
from combwalk.kernel import ResourceLimit

LOG1 = g.log_comb(1.0)
POLY1 = g.poly_comb(1.0)
LINE = g.custom_comb(lambda n: 0)  # plain Z


def segment(lo, hi):
    return [g.Vertex(n, 0) for n in range(lo, hi + 1)]


class TestPairResistance:
    def test_examples(self):
        assert rs.pair_resistance(LOG1, (0, 0), (1, 0)) == 1.0
        assert rs.pair_resistance(POLY1, (2, 1), (5, 0)) == 4.0
        assert rs.pair_resistance(LOG1, (3, 1), (3, 1)) == 0.0

    def test_solve_matches_distance(self):
        rng = np.random.default_rng(0)
        window = g.ball(LOG1, (0, 0), 25)
        verts = list(window.members)
        for _ in range(25):
            u, v = rng.choice(len(verts), size=2, replace=False)
            got = rs.pair_resistance_solve(LOG1, verts[u], verts[v], window)
            assert got == pytest.approx(
                g.distance(LOG1, verts[u], verts[v]), abs=1e-9)


class TestBoundaryResistance:
    def test_path_series_parallel(self):
        # interior {1..L-1} of a path: R(x, boundary) = a*b/(a+b)
        L = 12
        B = segment(1, L - 1)
        for xn in (1, 4, 7, 11):
            a, b = xn, L - xn
            got = rs.resistance_to_boundary(LINE, (xn, 0), B)
            assert got == pytest.approx(a * b / (a + b), abs=1e-9)

    def test_centered_ball_two_arms(self):
        # tooth-free ball of radius r: two arms of r+1 edges in parallel
        for r in (1, 3, 8):
            B = g.ball(LINE, (0, 0), r)
            got = rs.resistance_to_boundary(LINE, (0, 0), B)
            assert got == pytest.approx((r + 1) / 2.0, abs=1e-9)

    def test_comb_ball_meets_paper_floor(self):
        B = g.ball(LOG1, (40, 0), 10)
        assert rs.resistance_to_boundary(LOG1, (40, 0), B) >= 10 / 8.0

    def test_monotone_in_region(self):
        small = g.ball(LOG1, (20, 0), 5)
        large = g.ball(LOG1, (20, 0), 9)
        assert rs.resistance_to_boundary(LOG1, (20, 0), small) <= \
            rs.resistance_to_boundary(LOG1, (20, 0), large) + 1e-12

    def test_domain_errors(self):
        B = g.ball(LOG1, (0, 0), 3)
        with pytest.raises(ValueError):
            rs.resistance_to_boundary(LOG1, (9, 0), B)

    def test_punctured_region_commute_bound(self):
        # R(x, {y} u B^c) via a general absorbing set: remove y from B;
        # on a tree it is bounded by the tree distance to y
        x = g.Vertex(20, 0)
        B = g.ball(LOG1, x, 9)
        for y in ((22, 0), (20, 2), (15, 0)):
            punctured = [v for v in B.members if v != g.Vertex(*y)]
            got = rs.resistance_to_boundary(LOG1, x, punctured)
            assert got <= g.distance(LOG1, x, y) + 1e-9


class TestFusedResistance:
    def test_zero_on_equal(self):
        B = g.ball(LOG1, (5, 0), 4)
        assert rs.fused_pair_resistance(LOG1, (5, 0), (5, 0), B) == 0.0

    def test_bounded_by_distance(self):
        rng = np.random.default_rng(1)
        B = g.ball(LOG1, (10, 0), 8)
        verts = list(B.members)
        for _ in range(20):
            i, j = rng.choice(len(verts), size=2, replace=False)
            got = rs.fused_pair_resistance(LOG1, verts[i], verts[j], B)
            assert got <= g.distance(LOG1, verts[i], verts[j]) + 1e-9

    def test_far_boundary_approaches_distance(self):
        M = 600_000
        B = segment(-M, M)
        got = rs.fused_pair_resistance(LINE, (0, 0), (1, 0), B)
        assert got == pytest.approx(1.0, abs=1e-6)

    def test_triangle_bound(self):
        x = g.Vertex(15, 0)
        B = g.ball(LOG1, x, 7)
        rx = rs.resistance_to_boundary(LOG1, x, B)
        for y in list(B.members)[::5]:
            ry = rs.resistance_to_boundary(LOG1, y, B)
            rf = rs.fused_pair_resistance(LOG1, x, y, B)
            assert ry >= rx - rf - 1e-9


class TestExitTimes:
    def test_single_vertex(self):
        assert rs.expected_exit_time_direct(LINE, (0, 0), [(0, 0)]) == \
            pytest.approx(1.0, abs=1e-12)

    def test_1d_center_identity(self):
        for m in (1, 2, 5, 17, 40):
            B = segment(-m, m)
            got = rs.expected_exit_time_direct(LINE, (0, 0), B)
            assert got == pytest.approx((m + 1) ** 2, abs=1e-8)
            prof = rs.occupation_density(LINE, (0, 0), B)
            assert prof.expected_exit_time == pytest.approx((m + 1) ** 2,
                                                            abs=1e-8)

    def test_occupation_matches_direct(self):
        rng = np.random.default_rng(2)
        for _ in range(8):
            xn = int(rng.integers(-30, 30))
            r = int(rng.integers(2, 12))
            B = g.ball(LOG1, (xn, 0), r)
            prof = rs.occupation_density(LOG1, (xn, 0), B)
            direct = rs.expected_exit_time_direct(LOG1, (xn, 0), B)
            assert prof.expected_exit_time == pytest.approx(direct, abs=1e-9)

    def test_occupation_at_start_is_boundary_resistance(self):
        x = g.Vertex(12, 0)
        B = g.ball(LOG1, x, 6)
        prof = rs.occupation_density(LOG1, x, B)
        assert prof.g[x] == pytest.approx(
            rs.resistance_to_boundary(LOG1, x, B), abs=1e-10)

    def test_nonnegative_density(self):
        B = g.ball(LOG1, (8, 0), 5)
        prof = rs.occupation_density(LOG1, (8, 0), B)
        assert all(v >= -1e-12 for v in prof.g.values())

    def test_etu_upper_bound(self):
        for spec in (LOG1, g.log_comb(2.0)):
            for r in (1, 3, 8):
                B = g.ball(spec, (25, 0), r)
                _, m = rs.expected_exit_times(spec, B)
                assert m.max() <= 12.0 * r * len(B)

    def test_inverse_cap(self):
        big = g.Strip(3000)
        with pytest.raises(ResourceLimit):
            rs.occupation_density(LOG1, (0, 0), big)
