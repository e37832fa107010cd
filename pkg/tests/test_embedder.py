from collections import Counter

import networkx as nx
import pytest

from ramsey_forge.auxgraph import is_good, lift_embedding, min_degree_core
from ramsey_forge.embedder import (
    Disconnected,
    EmbedParams,
    Embedding,
    InvariantBreach,
    _add_leaf,
    _adjust,
    audit,
    available_neighbors,
    connect_trees,
    critical_set,
    embed_subdivision,
    extend_good,
    grow_tree,
    new_state,
    rollback,
)
from ramsey_forge.hypercore import Graph
from ramsey_forge.oracle import brute_find_mono_subdivision, verify_subdivision_embedding
from ramsey_forge.synthetic import blowup, random_regular
from ramsey_forge.task import SubdivisionTask

TRIANGLE = Graph(3, ((0, 1), (0, 2), (1, 2)))


def state(B, mode="plain", **kw):
    host, col, A = blowup(B, mode)
    Gp = A.graph
    Vp = sorted(Gp.non_isolated())
    st = new_state(A, Gp, Vp, Vp, EmbedParams(**kw), mode)
    st.aux_gp_edge = {A.hyperedge_of(u, v): (u, v) for u, v in Gp.edges}
    return st


def run(B, task, mode, **kw):
    host, col, A = blowup(B, mode)
    params = EmbedParams(**kw)
    res = params.resolved(A.s, mode, A.hypergraph.n_vertices)
    _, core = min_degree_core(A.graph, res.core_delta)
    emb, st, fail = embed_subdivision(A.graph, sorted(A.graph.non_isolated()), core, A, task, params)
    return emb, st, fail, host, col, A


def lift_ok(emb, host, col, A, task):
    mapping, _ = lift_embedding(A, host, col, emb.paths, task, emb.branch)
    return verify_subdivision_embedding(host, col, mapping, task).ok


def padded(n, edges):
    return Graph(n, tuple(sorted(tuple(sorted(e)) for e in edges)))


class TestAvailability:
    # path c - u - a - b with a = 0, b = 1, u = 2, c = 3
    B = padded(4, [(0, 1), (0, 2), (2, 3)])

    def test_empty_reference(self):
        st = state(self.B)
        assert available_neighbors(st, [], 2) == [0, 3]

    def test_hyperedge_meeting_J_excluded(self):
        st = state(self.B)
        assert available_neighbors(st, [(0, 1)], 2) == [3]

    def test_depth_one_vs_two(self):
        assert available_neighbors(state(self.B, "plain"), [(0, 1)], 3) == [2]
        assert available_neighbors(state(self.B, "induced"), [(0, 1)], 3) == []


class TestCriticalSet:
    def test_empty(self):
        st = state(random_regular(200, 4))
        assert critical_set(st, []).C == set()

    def test_single_edge(self):
        st = state(random_regular(200, 4))
        res = critical_set(st, [st.Gp.edges[0]])
        assert res.C == set() and res.X0 == 0

    def test_planted_hub(self):
        # hub 0 sees 60 matched pairs (y_i, z_i); d = 10 s d' = 60 with d' = 1
        edges = [(0, i) for i in range(1, 61)] + [(i, 60 + i) for i in range(1, 61)]
        st = state(padded(2000, edges), d_prime=1, alpha=1)
        J = [(i, 60 + i) for i in range(1, 61)]
        res = critical_set(st, J)
        assert res.C == {0} and len(res.reserved[0]) == 1
        assert res.hypothesis and res.bound_holds
        assert len(res.C) <= res.X0 + res.e_J / 1
        assert st.stats["critical_calls"][-1] == {"e_J": 60, "X0": 0, "C": 1, "hypothesis": True, "holds": True}

    def test_non_leaves_included(self):
        st = state(padded(10, [(0, 1), (1, 2), (2, 3)]))
        assert critical_set(st, [(0, 1), (1, 2), (2, 3)]).C == {1, 2}


class TestExtend:
    def test_empty(self):
        st = state(random_regular(200, 4))
        before = set(st.K)
        assert extend_good(st, set()) == [] and st.K == before

    def test_plain_two_children(self):
        st = state(padded(50, [(0, i) for i in range(1, 6)]))
        st.K_vertices.add(0)
        assert extend_good(st, {0}) == [0]
        assert st.K == {(0, 1), (0, 2)}
        assert is_good(st.aux, st.K, "plain").ok

    def test_induced_conflict_avoided(self):
        # 1 and 2 are adjacent; taking both as children would put h(12) twice into the closure
        st = state(padded(50, [(0, i) for i in range(1, 6)] + [(1, 2)]), "induced")
        st.K_vertices.add(0)
        extend_good(st, {0})
        kids = {u for e in st.K for u in e} - {0}
        assert len(kids) == 2 and not {1, 2} <= kids
        assert is_good(st.aux, st.K, "induced").ok
        assert st.stats["lll_calls"] == 1

    def test_failure_leaves_state(self):
        st = state(padded(50, [(0, 1), (0, 2)]))
        st.K_vertices.add(0)
        with pytest.raises(Exception):
            extend_good(st, {0})
        assert st.K == set()


class TestGrowTree:
    def test_trivial(self):
        st = state(random_regular(500, 4))
        T = grow_tree(st, 0, 0, 1, 10)
        assert T.frontier == [0] and T.path == [0]

    def test_binary_expansion(self):
        st = state(random_regular(1000, 4, seed=1))
        T = grow_tree(st, 0, 0, 7, 10)
        assert Counter(T.depth.values()) == {0: 1, 1: 2, 2: 4}
        assert len(st.J) == 6
        audit(st)

    def test_path_then_tree(self):
        st = state(random_regular(1000, 4, seed=2))
        T = grow_tree(st, 0, 3, 3, 10)
        assert len(T.path) == 4 and T.dist_from_root(T.frontier[0]) == 4
        assert T.route(st, T.frontier[0])[:4] == T.path

    def test_critical_tip_consumes_reserve(self):
        st = state(random_regular(1000, 4, seed=3))
        st.K_vertices.add(0)
        _add_leaf(st, 0)
        assert 0 in st.C
        J, C = set(st.J), set(st.C)
        u = _add_leaf(st, 0)
        assert st.J == J | {tuple(sorted((0, u)))} and st.C == C


class TestConnect:
    def test_adjacent_frontiers(self):
        st = state(random_regular(200, 4))
        x, y = st.Gp.edges[0]
        assert connect_trees(st, [x], [y]).path == [x, y]

    def test_shortest_path_oracle(self):
        B = random_regular(400, 4, seed=4)
        g = nx.Graph(list(B.edges))
        st = state(B)
        for x, y in [(0, 100), (5, 250), (17, 399), (3, 4)]:
            res = connect_trees(st, [x], [y])
            assert len(res.path) - 1 == nx.shortest_path_length(g, x, y)
            assert res.path[0] == x and res.path[-1] == y

    def test_separator(self):
        st = state(padded(5, [(0, 1), (1, 2), (2, 3), (3, 4)]))
        st.F = {2}
        with pytest.raises(Disconnected) as exc:
            connect_trees(st, [0], [4])
        assert exc.value.info["layers"]
        assert st.J == set() and st.K == set()

    def test_bad_frontiers(self):
        st = state(padded(5, [(0, 1)]))
        with pytest.raises(ValueError):
            connect_trees(st, [0], [0, 1])


class TestDriver:
    def test_odd_sigma_rejected(self):
        with pytest.raises(ValueError):
            SubdivisionTask.single_edge(7)

    def test_single_edge_sigma_12(self):
        task = SubdivisionTask.single_edge(12)
        emb, st, fail, host, col, A = run(random_regular(1000, 4), task, "plain")
        assert fail is None and 3 <= emb.sigma_prime[0] <= 6
        assert lift_ok(emb, host, col, A, task)

    def test_plain_triangle(self):
        task = SubdivisionTask(TRIANGLE, (12, 12, 12))
        emb, st, fail, host, col, A = run(random_regular(1000, 6), task, "plain")
        assert fail is None
        assert lift_ok(emb, host, col, A, task)
        # paths meet only at branch vertices
        inner = [set(p[1:-1]) for p in emb.paths]
        assert not (inner[0] & inner[1]) and not (inner[0] & inner[2]) and not (inner[1] & inner[2])

    def test_induced_triangle(self):
        task = SubdivisionTask(TRIANGLE, (12, 12, 12), "induced")
        emb, st, fail, host, col, A = run(random_regular(3000, 6), task, "induced")
        assert fail is None
        assert is_good(A, emb.edges(), "induced").ok
        assert lift_ok(emb, host, col, A, task)

    def test_post_rollback_state(self):
        task = SubdivisionTask.single_edge(12)
        emb, st, fail, *_ = run(random_regular(1000, 4), task, "plain")
        jv = {v for e in st.J for v in e}
        assert jv == set(emb.paths[0])
        audit(st, boundary=True, n_target=task.n_subdivided)
        J, K, C, F = set(st.J), set(st.K), set(st.C), set(st.F)
        rollback(st, emb.paths[0])
        assert (st.J, st.K, st.C, st.F) == (J, K, C, F)

    def test_audit_catches_forbidden_vertex(self):
        task = SubdivisionTask.single_edge(12)
        emb, st, *_ = run(random_regular(1000, 4), task, "plain")
        st.F.add(emb.paths[0][0])
        with pytest.raises(InvariantBreach) as exc:
            audit(st)
        assert exc.value.name == "A3"

    def test_deterministic(self):
        task = SubdivisionTask(TRIANGLE, (12, 12, 12))
        a = run(random_regular(1000, 6), task, "plain")[0]
        b = run(random_regular(1000, 6), task, "plain")[0]
        assert a.to_json() == b.to_json()
        assert Embedding.from_json(a.to_json()).vertex_map() == a.vertex_map()

    def test_empty_core_fails_cleanly(self):
        task = SubdivisionTask.single_edge(12)
        host, col, A = blowup(padded(10, [(0, 1), (1, 2)]))
        emb, st, fail = embed_subdivision(A.graph, [0, 1, 2], [], A, task, EmbedParams())
        assert emb is None and fail.edge == 0
        assert fail.attempts[0]["kind"] == "stuck"

    def test_far_branch_images_reported(self):
        # on this sparse base the third edge must join images at distance >= 7 > 6
        task = SubdivisionTask(TRIANGLE, (12, 12, 12))
        emb, st, fail, *_ = run(random_regular(1000, 4), task, "plain")
        assert emb is None and fail.edge == 2
        assert all(a["kind"] == "disconnected" for a in fail.attempts)
        assert min(a["rejected_lengths"][0] for a in fail.attempts) > 6

    def test_adjust(self):
        assert _adjust(4, 7, 10, 3, 6, 2) == (2, 7)
        assert _adjust(0, 7, 10, 3, 6, 2) == (0, 3)
        assert _adjust(1, 7, 1, 3, 6, 2) == (2, 7)
        assert _adjust(1, 7, 4, 3, 6, 2) == (1, 7)


class TestTinyAgreement:
    @pytest.mark.parametrize("mode", ["plain", "induced"])
    @pytest.mark.parametrize("edges,sigma", [([(0, 1)], 2), ([(0, 1)], 4), ([(0, 1), (1, 2)], 2), ([(0, 1), (1, 2)], 4)])
    def test_successes_confirmed_by_brute_force(self, mode, edges, sigma):
        B = padded(3 if len(edges) > 1 else 2, edges)
        host, col, A = blowup(B, mode)
        assert host.graph.n_vertices <= 14
        task = SubdivisionTask.single_edge(sigma, mode=mode)
        emb, st, fail = embed_subdivision(A.graph, sorted(A.graph.non_isolated()), sorted(A.graph.non_isolated()), A,
                                          task, EmbedParams(required=1, tree_size=1))
        brute = brute_find_mono_subdivision(host, col, task)
        if emb is not None:
            assert brute.ok
            assert lift_ok(emb, host, col, A, task)
        assert emb is not None
