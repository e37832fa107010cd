import random
from fractions import Fraction
from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramsey_forge.auxgraph import (
    AuxGraph,
    ExpanderHypothesisError,
    GadgetFailure,
    NoMixError,
    arc_lengths,
    closure,
    expander_gamma,
    extract_aux,
    extract_expander,
    is_good,
    lift_embedding,
    lift_path,
    min_degree_core,
    mono_max_subgraph,
    solve_path_mix,
)
from ramsey_forge.gadgets import Gadget, build_host, complete_graph, constant_coloring, cycle_graph
from ramsey_forge.hypercore import Graph, Hypergraph
from ramsey_forge.oracle import verify_expander
from ramsey_forge.synthetic import blowup
from ramsey_forge.task import SubdivisionTask


def aux(H, edges, h, colors=None):
    g = Graph(H.n_vertices, tuple(edges), tuple(colors) if colors else tuple(0 for _ in edges))
    # h is given parallel to ``edges``; Graph sorts its edges
    owner = dict(zip([tuple(sorted(e)) for e in edges], h))
    return AuxGraph(H, g, tuple(owner[e] for e in g.edges), None, 6)


def path_graph(n):
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


class TestExtractAux:
    def test_single_c6(self):
        H = Hypergraph(6, 6, (tuple(range(6)),))
        F = Gadget(cycle_graph(6), 6, True, "even", 1)
        host = build_host(H, F, [tuple(range(6))])
        A = extract_aux(host, constant_coloring(host), "induced", "even")
        assert A.graph.n_edges == 1 and (A.L1, A.L2) == (2, 4)
        rec = A.cycles[0]
        assert len(rec.arc_short) - 1 == 2 and len(rec.arc_long) - 1 == 4
        assert set(rec.arc_short[1:-1]).isdisjoint(rec.arc_long[1:-1])
        assert A.graph.edges[0] == (rec.arc_short[0], rec.arc_short[-1])

    def test_arc_lengths(self):
        assert arc_lengths(6) == (2, 4)
        assert arc_lengths(5) == (2, 3)
        assert arc_lengths(3) == (1, 2)

    def test_c5_arcs(self):
        H = Hypergraph(5, 5, (tuple(range(5)),))
        host = build_host(H, Gadget(cycle_graph(5), 5, True, "general", 1), [tuple(range(5))])
        A = extract_aux(host, constant_coloring(host), "induced", "general")
        assert A.ell == 5 and len(A.cycles[0].arc_short) == 3 and len(A.cycles[0].arc_long) == 4

    def test_gadget_failure_lists_hyperedges(self):
        H = Hypergraph(12, 6, (tuple(range(6)), tuple(range(6, 12))))
        host = build_host(H, Gadget(cycle_graph(6), 6, True, "even", 1), [tuple(range(6)), tuple(range(6, 12))])
        col = [1 if u >= 6 and (u, v) == (6, 7) else 0 for u, v in host.graph.edges]
        with pytest.raises(GadgetFailure) as exc:
            extract_aux(host, col, "induced", "even")
        assert exc.value.hyperedges == [1]

    def test_modal_length_filter(self):
        H = Hypergraph(15, 5, (tuple(range(5)), tuple(range(5, 10)), tuple(range(10, 15))))
        F = Gadget(complete_graph(5), 5, False, "general", 2)
        host = build_host(H, F, list(H.edges))
        pentagon = {tuple(sorted((10 + i, 10 + (i + 1) % 5))) for i in range(5)}
        col = [0 if u < 10 or (u, v) in pentagon else 1 for u, v in host.graph.edges]
        A = extract_aux(host, col, "plain", "general")
        assert A.ell == 3 and A.graph.n_edges == 2
        assert sorted(A.h) == [0, 1]

    def test_colour_matches_cycle(self):
        host, col, A = blowup(path_graph(5), color=1)
        assert all(c == 1 for c in A.graph.colors)
        assert all(rec.color == c for rec, c in zip(A.cycles, A.graph.colors))
        assert A.graph.n_edges <= host.hypergraph.n_edges


class TestMonoMax:
    H = Hypergraph(10, 2, tuple((i, i + 1) for i in range(9)))

    def test_all_one_colour(self):
        A = aux(self.H, [(0, 1), (1, 2)], [0, 1])
        g, c = mono_max_subgraph(A)
        assert c == 0 and g.n_edges == 2

    def test_majority(self):
        A = aux(self.H, [(i, i + 1) for i in range(5)], range(5), [0, 1, 0, 1, 0])
        g, c = mono_max_subgraph(A)
        assert c == 0 and g.n_edges == 3

    def test_tie_toward_smaller(self):
        A = aux(self.H, [(i, i + 1) for i in range(4)], range(4), [1, 0, 1, 0])
        assert mono_max_subgraph(A)[1] == 0

    def test_empty(self):
        with pytest.raises(ValueError):
            mono_max_subgraph(aux(self.H, [], []))


class TestExpander:
    def test_k10(self):
        K10 = complete_graph(10)
        Gp, cert = extract_expander(K10, 4, 2, Fraction(1, 2), 9)
        assert Gp == K10 and cert.verification_mode == "exact"
        assert verify_expander(Gp, cert.gamma).ok
        assert cert.gamma == expander_gamma(4, 2, Fraction(1, 2), 9)

    def test_two_cliques_split_once(self):
        edges = [(a, b) for a, b in combinations(range(6), 2)] + [(a, b) for a, b in combinations(range(6, 12), 2)]
        G = Graph(12, tuple(edges + [(5, 6)]))
        Gp, cert = extract_expander(G, Fraction(5, 2), 2, Fraction(1, 2), 6, gamma=Fraction(1, 2))
        assert len(cert.trace) == 2
        assert set(cert.vertices) in (set(range(6)), set(range(6, 12)))
        assert cert.density == Fraction(5, 2)
        assert verify_expander(Gp, cert.gamma, cert.vertices).ok

    def test_hypothesis_breach(self):
        with pytest.raises(ExpanderHypothesisError) as exc:
            extract_expander(path_graph(6), 2, Fraction(3, 2), Fraction(1, 2), 2)
        assert exc.value.trace[0]["size"] == 6

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32))
    def test_density_postcondition(self, seed):
        G = Graph(14, tuple(e for e in combinations(range(14), 2) if random.Random(seed * 97 + e[0] * 14 + e[1]).random() < 0.6))
        d = Fraction(G.n_edges, 14)
        if d <= Fraction(5, 2):
            return
        c1, c2 = d, Fraction(5, 4)
        try:
            Gp, cert = extract_expander(G, c1, c2, Fraction(1, 2), G.max_degree())
        except ExpanderHypothesisError:
            return
        assert cert.density >= (c1 + c2) / 2
        assert verify_expander(Gp, cert.gamma, cert.vertices).ok


class TestCore:
    def test_k5(self):
        g, core = min_degree_core(complete_graph(5), 4)
        assert core == (0, 1, 2, 3, 4) and g.n_edges == 10

    def test_star(self):
        star = Graph(10, tuple((0, i) for i in range(1, 10)))
        assert min_degree_core(star, 2)[1] == ()

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32), st.integers(1, 5))
    def test_matches_networkx_k_core(self, seed, delta):
        g = nx.gnp_random_graph(30, 0.2, seed=seed)
        G = Graph(30, tuple(sorted(tuple(sorted(e)) for e in g.edges())))
        _, core = min_degree_core(G, delta)
        assert set(core) == set(nx.k_core(g, delta).nodes())


CHAIN = Hypergraph(7, 3, ((0, 1, 2), (2, 3, 4), (4, 5, 6)))


class TestClosure:
    A = aux(CHAIN, [(0, 1), (2, 3), (4, 5)], [0, 1, 2])

    def test_single_edge(self):
        assert closure(self.A, [(0, 1)]) == {0, 1, 2}

    def test_empty(self):
        for t in (1, 2, 3):
            assert closure(self.A, [], t) == set()

    def test_chain_depths(self):
        assert closure(self.A, [(0, 1)], 2) == {0, 1, 2, 3, 4}
        assert closure(self.A, [(0, 1)], 3) == set(range(7))

    def test_edge_outside_g(self):
        with pytest.raises(ValueError):
            closure(self.A, [(0, 2)])

    @settings(max_examples=50, deadline=None)
    @given(st.sets(st.sampled_from([(0, 1), (2, 3), (4, 5)])), st.sets(st.sampled_from([(0, 1), (2, 3), (4, 5)])),
           st.integers(1, 3))
    def test_monotone(self, J1, J2, t):
        assert closure(self.A, J1, t) <= closure(self.A, J1 | J2, t)


class TestGood:
    def test_single_edge(self):
        H = Hypergraph(6, 3, ((0, 1, 2), (2, 3, 4)))
        A = aux(H, [(0, 1), (3, 4)], [0, 1])
        assert is_good(A, [(0, 1)], "plain").ok and is_good(A, [(0, 1)], "induced").ok

    def test_disjointness_violation(self):
        H = Hypergraph(5, 3, ((0, 1, 2), (2, 3, 4)))
        A = aux(H, [(0, 1), (3, 4)], [0, 1])
        v = is_good(A, [(0, 1), (3, 4)], "plain")
        assert not v.ok and v.witness["kind"] == "disjointness" and v.witness["vertex"] == 2

    def test_mode_separation(self):
        # path 0-1-2 in hyperedges {0,1,5} and {1,2,6}; {5,6,7} meets the closure twice
        H = Hypergraph(8, 3, ((0, 1, 5), (1, 2, 6), (5, 6, 7)))
        A = aux(H, [(0, 1), (1, 2)], [0, 1])
        J = [(0, 1), (1, 2)]
        assert is_good(A, J, "plain").ok
        v = is_good(A, J, "induced")
        assert not v.ok and v.witness == {"kind": "closure", "hyperedge": 2}


class TestPathMix:
    def test_examples(self):
        assert solve_path_mix(12, 4, 2, 4) == (2, 2)
        assert solve_path_mix(10, 5, 2, 3) == (5, 0)
        with pytest.raises(NoMixError):
            solve_path_mix(7, 2, 2, 4)

    @given(st.integers(1, 60), st.integers(1, 20), st.integers(1, 4), st.integers(1, 4))
    def test_matches_exhaustive(self, sigma, sp, L1, dL):
        L2 = L1 + dL
        sols = [(a, sp - a) for a in range(sp + 1) if a * L1 + (sp - a) * L2 == sigma]
        if sols:
            assert solve_path_mix(sigma, sp, L1, L2) == sols[0]
        else:
            with pytest.raises(NoMixError):
                solve_path_mix(sigma, sp, L1, L2)


class TestLift:
    def test_one_chord_short_arc(self):
        host, col, A = blowup(path_graph(2))
        hp = lift_path(A, [0, 1], 2)
        assert len(hp) == 3 and hp[0] == 0 and hp[-1] == 1

    def test_sigma_12_single_edge(self):
        host, col, A = blowup(path_graph(6))
        task = SubdivisionTask.single_edge(12)
        mapping, verdict = lift_embedding(A, host, col, [[0, 1, 2, 3, 4]], task)
        assert verdict.ok
        assert mapping[0] == 0 and mapping[1] == 4

    def test_lengths_add_up(self):
        host, col, A = blowup(path_graph(8))
        for sp in range(1, 7):
            for sigma in range(2 * sp, 4 * sp + 1, 2):
                hp = lift_path(A, list(range(sp + 1)), sigma)
                assert len(hp) - 1 == sigma and len(set(hp)) == len(hp)

    def test_induced_triangle_lift(self):
        # base graph: a 9-cycle, so a triangle of H maps onto three 3-edge paths
        host, col, A = blowup(Graph(9, tuple(sorted(tuple(sorted((i, (i + 1) % 9))) for i in range(9)))), "induced")
        tri = SubdivisionTask(Graph(3, ((0, 1), (0, 2), (1, 2))), (6, 6, 6), "induced")
        paths = [[0, 1, 2, 3], [0, 8, 7, 6], [3, 4, 5, 6]]
        mapping, verdict = lift_embedding(A, host, col, paths, tri)
        assert verdict.ok

    def test_bad_path_raises(self):
        host, col, A = blowup(path_graph(4))
        task = SubdivisionTask.single_edge(4)
        with pytest.raises(NoMixError):
            lift_embedding(A, host, col, [[0, 1, 2, 3]], task)
