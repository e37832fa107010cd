import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramsey_forge.hypercore import (
    BergeCycle,
    Graph,
    Hypergraph,
    berge_girth,
    check_edge_sparsity_Q2,
    check_sparsity_P4,
    check_sparsity_P4prime,
    is_linear,
    sparsity_P4_sum,
)
from ramsey_forge.oracle import brute_girth


def H(*edges, n=None, s=None):
    s = s or len(edges[0])
    n = n or (max(max(e) for e in edges) + 1)
    return Hypergraph(n, s, tuple(tuple(e) for e in edges))


def random_hypergraph(rng, max_edges=8, max_n=20):
    s = rng.randint(2, 4)
    n = rng.randint(s, max_n)
    m = rng.randint(0, max_edges)
    return Hypergraph(n, s, tuple(tuple(sorted(rng.sample(range(n), s))) for _ in range(m)))


hypergraphs = st.integers(0, 2**32).map(lambda x: random_hypergraph(random.Random(x)))


class TestTypes:
    def test_hypergraph_rejects_wrong_size(self):
        with pytest.raises(ValueError):
            Hypergraph(5, 3, ((0, 1),))

    def test_hypergraph_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Hypergraph(3, 2, ((0, 5),))

    def test_hypergraph_json_roundtrip(self):
        h = H((0, 1, 2), (2, 3, 4))
        assert Hypergraph.from_json(h.to_json()) == h

    def test_graph_rejects_loops_and_parallel_edges(self):
        with pytest.raises(ValueError):
            Graph(3, ((1, 1),))
        with pytest.raises(ValueError):
            Graph(3, ((0, 1), (1, 0)))

    def test_graph_colors_follow_sorted_edges(self):
        g = Graph(3, ((1, 2), (0, 1)), (5, 7))
        assert g.edges == ((0, 1), (1, 2))
        assert g.color_of(1, 2) == 5 and g.color_of(0, 1) == 7

    def test_graph_json_roundtrip(self):
        g = Graph(4, ((0, 1), (2, 3)), (0, 1))
        assert Graph.from_json(g.to_json()) == g


class TestGirth:
    def test_one_shared_vertex_is_acyclic(self):
        g, w = berge_girth(H((0, 1, 2), (2, 3, 4)), 10)
        assert g is None and w is None

    def test_two_shared_vertices_give_two_cycle(self):
        h = H((0, 1, 2), (1, 2, 3))
        g, w = berge_girth(h, 10)
        assert g == 2
        assert set(w.vertices) == {1, 2} and set(w.edges) == {0, 1}
        assert w.is_valid(h)

    def test_linear_triangle(self):
        h = H((0, 1, 2), (2, 3, 4), (4, 5, 0))
        g, w = berge_girth(h, 10)
        assert g == 3 and w.is_valid(h)

    def test_cap_hides_longer_cycles(self):
        h = H((0, 1, 2), (2, 3, 4), (4, 5, 0))
        assert berge_girth(h, 2) == (None, None)

    def test_empty(self):
        assert berge_girth(Hypergraph(3, 3, ()), 5) == (None, None)

    def test_invalid_cycle_detected(self):
        h = H((0, 1, 2), (2, 3, 4))
        assert not BergeCycle((0, 2), (0, 1)).is_valid(h)

    @settings(max_examples=60, deadline=None)
    @given(hypergraphs)
    def test_matches_oracle(self, h):
        g, w = berge_girth(h, 8)
        assert g == brute_girth(h)
        if w is not None:
            assert w.is_valid(h) and w.length == g

    @settings(max_examples=60, deadline=None)
    @given(hypergraphs)
    def test_girth_three_implies_linear(self, h):
        g, _ = berge_girth(h, 2)
        assert is_linear(h) == (g is None)


class TestLinear:
    def test_examples(self):
        assert is_linear(H((0, 1, 2), (2, 3, 4)))
        assert not is_linear(H((0, 1, 2), (1, 2, 3)))


class TestSparsity:
    def test_P4_empty_set(self):
        assert check_sparsity_P4(H((0, 1, 2)), set())

    def test_P4_examples(self):
        assert sparsity_P4_sum(H((0, 1, 2), (1, 2, 3)), {1, 2}) == 4
        assert check_sparsity_P4(H((0, 1, 2), (1, 2, 3)), {1, 2})
        assert not check_sparsity_P4(H((0, 1, 2), (1, 2, 3), (1, 2, 4)), {1, 2})

    def test_P4prime_examples(self):
        assert check_sparsity_P4prime(Hypergraph(3, 3, ()), set())
        assert check_sparsity_P4prime(H((0, 1, 2), (1, 2, 3)), {1, 2})
        five = H(*[(1, 2, v) for v in range(3, 8)])
        assert not check_sparsity_P4prime(five, {1, 2})

    @settings(max_examples=40, deadline=None)
    @given(hypergraphs, st.integers(0, 2**32))
    def test_P4_safe_under_deletion(self, h, seed):
        rng = random.Random(seed)
        A = set(rng.sample(range(h.n_vertices), rng.randint(0, h.n_vertices)))
        if h.n_edges and check_sparsity_P4(h, A):
            drop = rng.randrange(h.n_edges)
            assert check_sparsity_P4(h.subhypergraph(i for i in range(h.n_edges) if i != drop), A)

    def test_Q2_examples(self):
        tri = Graph(3, ((0, 1), (1, 2), (0, 2)))
        k4 = Graph(4, tuple((i, j) for i in range(4) for j in range(i + 1, 4)))
        assert check_edge_sparsity_Q2(tri, set())
        assert check_edge_sparsity_Q2(tri, {0, 1, 2}, Fraction(5, 4))
        assert not check_edge_sparsity_Q2(k4, {0, 1, 2, 3}, Fraction(5, 4))
