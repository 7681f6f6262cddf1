"""Comb geometry tests.

Core claims:
    - tooth heights follow the floored log/poly laws and are symmetric
    - degrees are in {1,2,3} and equal the neighbor count
    - neighbor lists are canonically sorted and symmetric
    - the closed-form tree distance agrees with BFS
    - balls/volumes are exact; volume >= r + 1
    - the tooth-sum witness never exceeds the true volume
    - parity flips along every edge
"""

import math

import pytest
from hypothesis import given, settings, strategies as st

from combwalk import graph as g

LOG1 = g.log_comb(1.0)
LOG2 = g.log_comb(2.0)
POLY1 = g.poly_comb(1.0)
SPECS = [g.log_comb(0.5), LOG1, LOG2, POLY1, g.poly_comb(2.0)]


def bfs_distance(spec, u, v, cap=200):
    u, v = g.Vertex(*u), g.Vertex(*v)
    frontier = {u}
    seen = {u}
    d = 0
    while d <= cap:
        if v in frontier:
            return d
        nxt = set()
        for w in frontier:
            for nb in g.neighbors(spec, w):
                if nb not in seen:
                    seen.add(nb)
                    nxt.add(nb)
        frontier = nxt
        d += 1
    raise AssertionError("BFS cap exceeded")


def bfs_ball(spec, center, r):
    frontier = {g.Vertex(*center)}
    seen = set(frontier)
    for _ in range(r):
        nxt = set()
        for w in frontier:
            for nb in g.neighbors(spec, w):
                if nb not in seen:
                    seen.add(nb)
                    nxt.add(nb)
        frontier = nxt
    return seen


def random_vertex(spec, n_range=40):
    return st.tuples(
        st.integers(-n_range, n_range), st.integers(0, 50)
    ).map(lambda t: g.Vertex(t[0], min(t[1], g.tooth_height(spec, t[0]))))


class TestHeights:
    def test_log_examples(self):
        assert g.tooth_height(LOG1, 0) == 0
        assert g.tooth_height(LOG1, 1) == 0
        assert g.tooth_height(LOG1, -1) == 0
        assert g.tooth_height(LOG1, 10) == 2  # ln 10 = 2.3026

    def test_poly_example(self):
        assert g.tooth_height(g.poly_comb(2.0), 3) == 9

    def test_symmetry(self):
        for spec in SPECS:
            for n in range(0, 30):
                assert g.tooth_height(spec, n) == g.tooth_height(spec, -n)

    def test_log_base_override(self):
        base10 = g.CombSpec(family="log", alpha=1.0, log_base=10.0)
        assert g.tooth_height(base10, 100) == 2
        assert g.tooth_height(base10, 99) == 1

    def test_custom_negative_rejected(self):
        bad = g.custom_comb(lambda n: -1)
        with pytest.raises(ValueError):
            g.tooth_height(bad, 3)

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            g.CombSpec(family="log", alpha=0.0)
        with pytest.raises(ValueError):
            g.CombSpec(family="nope")


class TestDegreesAndNeighbors:
    def test_degree_examples(self):
        assert g.degree(LOG1, (0, 0)) == 2
        assert g.degree(LOG1, (10, 2)) == 1
        assert g.degree(LOG1, (10, 0)) == 3

    def test_neighbors_examples(self):
        assert g.neighbors(LOG1, (0, 0)) == [(-1, 0), (1, 0)]
        assert g.neighbors(LOG1, (10, 1)) == [(10, 0), (10, 2)]
        assert g.neighbors(LOG1, (5, 0)) == [(4, 0), (5, 1), (6, 0)]

    def test_inadmissible_rejected(self):
        with pytest.raises(g.InadmissibleVertex):
            g.neighbors(LOG1, (0, 1))
        with pytest.raises(g.InadmissibleVertex):
            g.degree(LOG1, (2, 1))

    @given(data=st.data())
    @settings(max_examples=60, deadline=None)
    def test_degree_range_and_symmetry(self, data):
        spec = data.draw(st.sampled_from(SPECS))
        v = data.draw(random_vertex(spec))
        nbrs = g.neighbors(spec, v)
        assert 1 <= len(nbrs) <= 3
        assert g.degree(spec, v) == len(nbrs)
        assert nbrs == sorted(nbrs)
        for u in nbrs:
            assert v in g.neighbors(spec, u)
            assert g.parity(u) != g.parity(v)


class TestDistance:
    def test_examples(self):
        assert g.distance(POLY1, (2, 1), (5, 0)) == 4
        assert g.distance(POLY1, (3, 2), (3, 2)) == 0
        assert g.distance(POLY1, (-2, 1), (2, 1)) == 6

    @given(data=st.data())
    @settings(max_examples=40, deadline=None)
    def test_matches_bfs(self, data):
        spec = data.draw(st.sampled_from([LOG1, LOG2, POLY1]))
        u = data.draw(random_vertex(spec, n_range=8))
        v = data.draw(random_vertex(spec, n_range=8))
        assert g.distance(spec, u, v) == bfs_distance(spec, u, v)

    @given(data=st.data())
    @settings(max_examples=40, deadline=None)
    def test_triangle_inequality(self, data):
        spec = data.draw(st.sampled_from(SPECS))
        u = data.draw(random_vertex(spec, 15))
        v = data.draw(random_vertex(spec, 15))
        w = data.draw(random_vertex(spec, 15))
        assert g.distance(spec, u, w) <= \
            g.distance(spec, u, v) + g.distance(spec, v, w)


class TestBallsAndVolumes:
    def test_examples(self):
        assert g.volume(LOG1, (0, 0), 1) == 3
        assert g.volume(LOG2, (7, 1), 0) == 1

    def test_ball_matches_bfs(self):
        for spec in (LOG1, LOG2, POLY1):
            b = g.ball(spec, (40, 0), 10)
            assert set(b.members) == bfs_ball(spec, (40, 0), 10)
            assert len(b) == g.volume(spec, (40, 0), 10)

    def test_ball_membership_is_exact(self):
        b = g.ball(LOG2, (3, 1), 6)
        for v in b.members:
            assert g.distance(LOG2, (3, 1), v) <= 6
        assert b.contains((3, 1))

    @given(data=st.data())
    @settings(max_examples=40, deadline=None)
    def test_volume_lower_bound(self, data):
        spec = data.draw(st.sampled_from(SPECS))
        c = data.draw(random_vertex(spec, 20))
        r = data.draw(st.integers(0, 25))
        assert g.volume(spec, c, r) >= r + 1

    @given(data=st.data())
    @settings(max_examples=30, deadline=None)
    def test_witness_below_volume(self, data):
        spec = data.draw(st.sampled_from([LOG1, LOG2]))
        n = data.draw(st.integers(0, 40))
        u = data.draw(st.integers(0, g.tooth_height(spec, n)))
        r = data.draw(st.integers(u, u + 25))
        wit = g.volume_witness_lower_bound(spec, (n, u), r)
        assert wit <= g.volume(spec, (n, u), r)

    def test_witness_examples(self):
        assert g.volume_witness_lower_bound(LOG1, (0, 0), 3) == 0
        top = g.tooth_height(LOG1, 40)
        assert g.volume_witness_lower_bound(LOG1, (40, top), top) == 0
        with pytest.raises(ValueError):
            g.volume_witness_lower_bound(LOG1, (-3, 0), 5)


class TestStrip:
    def test_membership(self):
        s = g.Strip(3)
        assert s.contains((3, 0)) and s.contains((-3, 1))
        assert not s.contains((4, 0))

    def test_vertices_enumeration(self):
        vs = g.Strip(5).vertices(LOG1)
        assert g.Vertex(0, 0) in vs
        assert g.Vertex(5, 1) in vs  # ln 5 = 1.609
        assert all(abs(v.n) <= 5 for v in vs)
        assert vs == sorted(vs)

    def test_heights_array_matches_scalar(self):
        arr = g.heights_array(LOG2, 50)
        for n in range(-50, 51):
            assert arr[n + 50] == g.tooth_height(LOG2, n)
