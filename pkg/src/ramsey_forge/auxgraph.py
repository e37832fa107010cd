"""The chord graph G, its dense monochromatic expander, closures and goodness.

Each hyperedge whose gadget copy carries a monochromatic target cycle gives
one edge of G: a chord joining two cycle vertices at distance L1. The two
arcs of the cycle between the chord ends (lengths L1 and L2) are stored so a
path in G can later be expanded into a path of any length in between.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .gadgets import HostGraph, copy_colored, find_mono_cycle, most_frequent_odd_length
from .hypercore import Edge, Graph, Hypergraph, norm_edge
from .oracle import Verdict, verify_subdivision_embedding
from .task import SubdivisionTask

EXACT_EXPANDER_LIMIT = 18


class GadgetFailure(RuntimeError):
    def __init__(self, hyperedges: list[int]):
        super().__init__(f"{len(hyperedges)} gadget copies without a monochromatic target cycle: {hyperedges[:20]}")
        self.hyperedges = hyperedges


class ExpanderHypothesisError(RuntimeError):
    def __init__(self, msg: str, trace: list):
        super().__init__(msg)
        self.trace = trace


class NoMixError(ValueError):
    pass


def arc_lengths(ell: int) -> tuple[int, int]:
    L1 = (ell - 1) // 2
    return L1, ell - L1


@dataclass(frozen=True)
class CycleRecord:
    hyperedge: int
    color: int
    cycle: tuple[int, ...]
    arc_short: tuple[int, ...]  # chord[0] -> chord[1], L1 edges
    arc_long: tuple[int, ...]  # chord[0] -> chord[1], L2 edges

    def to_json(self, edge: int) -> dict:
        return {"edge": edge, "hyperedge": self.hyperedge, "color": self.color, "cycle": list(self.cycle),
                "arcL1": list(self.arc_short), "arcL2": list(self.arc_long)}


@dataclass(frozen=True)
class AuxGraph:
    hypergraph: Hypergraph
    graph: Graph  # coloured
    h: tuple[int, ...]  # parallel to graph.edges
    cycles: tuple[CycleRecord, ...] | None
    ell: int
    mode: str = "plain"
    case: str = "even"

    @property
    def L1(self) -> int:
        return arc_lengths(self.ell)[0]

    @property
    def L2(self) -> int:
        return arc_lengths(self.ell)[1]

    @property
    def s(self) -> int:
        return self.hypergraph.s

    def hyperedge_of(self, u: int, v: int) -> int:
        return self.h[self.graph.edge_index[norm_edge(u, v)]]

    def to_json(self) -> dict:
        out = {"graph": self.graph.to_json(), "h": list(self.h), "ell": self.ell, "L1": self.L1, "L2": self.L2,
               "mode": self.mode, "case": self.case}
        if self.cycles is not None:
            out["cycles"] = [c.to_json(i) for i, c in enumerate(self.cycles)]
        return out

    @classmethod
    def from_json(cls, d: dict, hypergraph: Hypergraph) -> "AuxGraph":
        g = Graph.from_json(d["graph"])
        cycles = None
        if "cycles" in d:
            cycles = tuple(CycleRecord(c["hyperedge"], c["color"], tuple(c["cycle"]), tuple(c["arcL1"]), tuple(c["arcL2"]))
                           for c in d["cycles"])
        return cls(hypergraph, g, tuple(d["h"]), cycles, int(d["ell"]), d.get("mode", "plain"), d.get("case", "even"))


def _chord_record(idx: int, cycle: tuple[int, ...], color: int, L1: int) -> tuple[Edge, CycleRecord]:
    ell = len(cycle)
    best = None
    for i in range(ell):
        x, y = cycle[i], cycle[(i + L1) % ell]
        key = norm_edge(x, y)
        if best is None or key < best[0]:
            best = (key, i)
    key, i = best
    short = tuple(cycle[(i + t) % ell] for t in range(L1 + 1))
    long = tuple(cycle[(i - t) % ell] for t in range(ell - L1 + 1))
    if short[0] != key[0]:
        short, long = short[::-1], long[::-1]
    return key, CycleRecord(idx, color, cycle, short, long)


def extract_aux(host: HostGraph, coloring: Sequence[int], mode: str, case: str) -> AuxGraph:
    F = host.gadget
    if len(coloring) != host.graph.n_edges:
        raise ValueError("coloring must cover every host edge")
    induced = mode == "induced"
    H = host.hypergraph
    copies = [copy_colored(host, coloring, idx) for idx in range(H.n_edges)]
    found: list = []
    if F.exact_length:
        ell = F.ell
        failures = []
        for idx, (Fc, _) in enumerate(copies):
            c = find_mono_cycle(Fc, ell, induced)
            if c is None:
                failures.append(idx)
            found.append(c)
        if failures:
            raise GadgetFailure(failures)
    else:
        shortest = [find_mono_cycle(Fc, F.ell, induced, exact=False) for Fc, _ in copies]
        lengths = [c.length for c in shortest if c is not None]
        if not lengths:
            raise GadgetFailure(list(range(H.n_edges)))
        ell = most_frequent_odd_length(lengths)
        found = [find_mono_cycle(Fc, ell, induced) for Fc, _ in copies]
    L1, _ = arc_lengths(ell)
    chords: dict[Edge, tuple[int, CycleRecord]] = {}
    for idx, ((_, labels), c) in enumerate(zip(copies, found)):
        if c is None:
            continue
        cyc = tuple(labels[v] for v in c.vertices)
        key, rec = _chord_record(idx, cyc, c.color, L1)
        chords[key] = (c.color, rec)
    g = Graph(H.n_vertices, tuple(chords), tuple(chords[e][0] for e in chords))
    recs = tuple(chords[e][1] for e in g.edges)
    return AuxGraph(H, g, tuple(r.hyperedge for r in recs), recs, ell, mode, case)


def mono_max_subgraph(A: AuxGraph) -> tuple[Graph, int]:
    G = A.graph
    if G.n_edges == 0:
        raise ValueError("auxiliary graph has no edges")
    counts = Counter(G.colors)
    top = max(counts.values())
    color = min(c for c, n in counts.items() if n == top)
    return Graph(G.n_vertices, tuple(e for e, c in zip(G.edges, G.colors) if c == color)), color


# ------------------------------------------------------------ expanders


@dataclass
class ExpanderCert:
    vertices: tuple[int, ...]
    density: Fraction
    gamma: Fraction
    verification_mode: str  # exact | sampled
    trace: list = field(default_factory=list)
    fallback: str | None = None

    def to_json(self) -> dict:
        return {"n_vertices": len(self.vertices), "vertices": list(self.vertices), "density": str(self.density),
                "gamma": str(self.gamma), "verification_mode": self.verification_mode, "trace": self.trace,
                "fallback": self.fallback}


def _ceil_log2_inv(alpha: Fraction) -> int:
    # smallest t with 2^t >= 1/alpha
    t = 0
    while Fraction(2) ** t < 1 / alpha:
        t += 1
    return max(t, 1)


def expander_gamma(c1, c2, alpha, delta_cap) -> Fraction:
    c1, c2, alpha = Fraction(c1), Fraction(c2), Fraction(alpha)
    return (c1 - c2) / (2 * delta_cap * _ceil_log2_inv(alpha))


def _induced_adj(G: Graph, U: set[int]) -> dict[int, set[int]]:
    return {v: {u for u in G.neighbors(v) if u in U} for v in U}


def _density(adj: dict[int, set[int]], S: Iterable[int]) -> Fraction:
    S = set(S)
    if not S:
        return Fraction(0)
    e = sum(1 for v in S for u in adj[v] if u in S and u > v)
    return Fraction(e, len(S))


def _outside_nbrs(adj, S: set[int]) -> set[int]:
    out: set[int] = set()
    for v in S:
        out |= adj[v]
    return out - S


def _exact_violator(adj, gamma) -> list[int] | None:
    V = sorted(adj)
    for size in range(1, len(V) // 2 + 1):
        for S in combinations(V, size):
            if len(_outside_nbrs(adj, set(S))) < gamma * size:
                return list(S)
    return None


def _components(adj) -> list[list[int]]:
    seen: set[int] = set()
    comps = []
    for v in sorted(adj):
        if v in seen:
            continue
        comp = []
        dq = deque([v])
        seen.add(v)
        while dq:
            x = dq.popleft()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    dq.append(y)
        comps.append(sorted(comp))
    return comps


def _sweep(adj, order: list[int], gamma) -> list[int] | None:
    half = len(order) // 2
    S: set[int] = set()
    nb: Counter = Counter()  # for vertices outside S: number of neighbours in S
    for i, v in enumerate(order[:half]):
        S.add(v)
        nb.pop(v, None)
        for u in adj[v]:
            if u not in S:
                nb[u] += 1
        if len(nb) < gamma * len(S):
            return order[: i + 1]
    return None


def _heuristic_violator(adj, gamma) -> list[int] | None:
    comps = _components(adj)
    if len(comps) > 1:
        return min(comps, key=lambda c: (len(c), c[0]))
    V = sorted(adj)
    # spectral sweep along the Fiedler vector, both directions
    idx = {v: i for i, v in enumerate(V)}
    n = len(V)
    Lap = np.zeros((n, n))
    for v in V:
        i = idx[v]
        Lap[i, i] = len(adj[v])
        for u in adj[v]:
            Lap[i, idx[u]] = -1.0
    _, vecs = np.linalg.eigh(Lap)
    f = vecs[:, 1]
    order = sorted(V, key=lambda v: (round(float(f[idx[v]]), 12), v))
    for o in (order, order[::-1]):
        S = _sweep(adj, o, gamma)
        if S is not None:
            return S
    # local search: BFS balls around each vertex
    for v in V:
        ball = [v]
        seen = {v}
        dq = deque([v])
        while dq:
            x = dq.popleft()
            for y in sorted(adj[x]):
                if y not in seen:
                    seen.add(y)
                    ball.append(y)
                    dq.append(y)
        S = _sweep(adj, ball, gamma)
        if S is not None:
            return S
    return None


def extract_expander(G_red: Graph, c1, c2, alpha, delta_cap: int, vertices: Iterable[int] | None = None,
                     gamma=None, exact_limit: int = EXACT_EXPANDER_LIMIT) -> tuple[Graph, ExpanderCert]:
    """Density-increment search for a dense induced expander.

    While some S with |S| <= |U|/2 has fewer than gamma|S| outside
    neighbours, U shrinks to whichever of S + N(S) and U - S is denser.
    """
    c1, c2, alpha = Fraction(c1), Fraction(c2), Fraction(alpha)
    V = set(range(G_red.n_vertices) if vertices is None else vertices)
    gamma = expander_gamma(c1, c2, alpha, delta_cap) if gamma is None else Fraction(gamma)
    adj = _induced_adj(G_red, V)
    dens = _density(adj, V)
    trace = [{"size": len(V), "density": str(dens)}]
    if not (dens >= c1 and c1 > c2 and c2 > 1):
        raise ExpanderHypothesisError(f"need density {float(dens):.4g} >= c1={c1} > c2={c2} > 1", trace)
    maxdeg = max((len(a) for a in adj.values()), default=0)
    if maxdeg > delta_cap:
        raise ExpanderHypothesisError(f"max degree {maxdeg} exceeds delta_cap={delta_cap}", trace)
    U = set(V)
    while True:
        sub = _induced_adj(G_red, U)
        S = _exact_violator(sub, gamma) if len(U) <= exact_limit else _heuristic_violator(sub, gamma)
        if S is None:
            break
        S = set(S)
        side1 = S | _outside_nbrs(sub, S)
        side2 = U - S
        d1, d2 = _density(sub, side1), _density(sub, side2)
        U = side1 if d1 > d2 else side2
        trace.append({"size": len(U), "density": str(max(d1, d2)), "split": len(S)})
    sub = _induced_adj(G_red, U)
    dens = _density(sub, U)
    mode = "exact" if len(U) <= exact_limit else "sampled"
    if dens < (c1 + c2) / 2 or len(U) < alpha * len(V):
        raise ExpanderHypothesisError(
            f"increment ended at {len(U)} vertices with density {float(dens):.4g}; promised >= {float((c1 + c2) / 2):.4g} "
            f"on >= {float(alpha * len(V)):.4g} vertices", trace)
    Gp = Graph(G_red.n_vertices, tuple(G_red.induced_edges(U)))
    return Gp, ExpanderCert(tuple(sorted(U)), dens, gamma, mode, trace)


def largest_component(G: Graph, vertices: Iterable[int] | None = None) -> tuple[Graph, tuple[int, ...]]:
    V = set(range(G.n_vertices) if vertices is None else vertices)
    adj = _induced_adj(G, V)
    comps = [c for c in _components(adj)]
    best = max(comps, key=lambda c: (sum(len(adj[v]) for v in c), len(c), -c[0])) if comps else []
    return Graph(G.n_vertices, tuple(G.induced_edges(best))), tuple(best)


def min_degree_core(G: Graph, delta: int, vertices: Iterable[int] | None = None) -> tuple[Graph, tuple[int, ...]]:
    U = set(range(G.n_vertices) if vertices is None else vertices)
    deg = {v: sum(1 for u in G.neighbors(v) if u in U) for v in U}
    stack = [v for v in U if deg[v] < delta]
    removed: set[int] = set()
    while stack:
        v = stack.pop()
        if v in removed:
            continue
        removed.add(v)
        for u in G.neighbors(v):
            if u in U and u not in removed:
                deg[u] -= 1
                if deg[u] < delta:
                    stack.append(u)
    core = U - removed
    return Graph(G.n_vertices, tuple(G.induced_edges(core))), tuple(sorted(core))


# ------------------------------------------------------------ closure and goodness


def _edge_hyperedges(A: AuxGraph, J: Iterable[Edge]) -> list[int]:
    index = A.graph.edge_index
    out = []
    for e in J:
        key = norm_edge(*e)
        if key not in index:
            raise ValueError(f"edge {key} is not an edge of G")
        out.append(A.h[index[key]])
    return out


def closure(A: AuxGraph, J: Iterable[Edge], depth: int = 1) -> set[int]:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    H = A.hypergraph
    cl: set[int] = set()
    for f in _edge_hyperedges(A, J):
        cl.update(H.edges[f])
    inc = H.incidence
    for _ in range(depth - 1):
        nxt = set(cl)
        for v in cl:
            for f in inc[v]:
                nxt.update(H.edges[f])
        cl = nxt
    return cl


def is_good(A: AuxGraph, J: Iterable[Edge], mode: str) -> Verdict:
    J = sorted({norm_edge(*e) for e in J})
    hs = _edge_hyperedges(A, J)
    H = A.hypergraph
    # condition 1: non-adjacent edges have disjoint hyperedges
    through: dict[int, list[int]] = {}
    for i, f in enumerate(hs):
        for w in H.edges[f]:
            through.setdefault(w, []).append(i)
    for w in sorted(through):
        lst = through[w]
        for i, j in combinations(lst, 2):
            if not set(J[i]) & set(J[j]):
                return Verdict(False, {"kind": "disjointness", "edges": [list(J[i]), list(J[j])], "vertex": w},
                               "non-adjacent edges with intersecting hyperedges")
    if mode == "induced":
        cl = set()
        for f in hs:
            cl.update(H.edges[f])
        own = set(hs)
        meet: Counter = Counter()
        for v in cl:
            for f in H.incidence[v]:
                meet[f] += 1
        for f in sorted(meet):
            if meet[f] >= 2 and f not in own:
                return Verdict(False, {"kind": "closure", "hyperedge": f}, "foreign hyperedge meets the closure twice")
    return Verdict(True)


# ------------------------------------------------------------ lifting


def solve_path_mix(sigma: int, sigma_prime: int, L1: int, L2: int) -> tuple[int, int]:
    if sigma_prime < 1:
        raise ValueError("sigma_prime must be >= 1")
    if L2 <= L1:
        raise ValueError("need L1 < L2")
    num = sigma - L1 * sigma_prime
    if num % (L2 - L1):
        raise NoMixError(f"no mix: {sigma} - {L1}*{sigma_prime} not divisible by {L2 - L1}")
    b = num // (L2 - L1)
    if not 0 <= b <= sigma_prime:
        raise NoMixError(f"no mix: b={b} outside [0, {sigma_prime}]")
    return sigma_prime - b, b


def lift_path(A: AuxGraph, path: Sequence[int], sigma: int) -> list[int]:
    """Host path of length ``sigma`` following the G-path ``path``: the first
    a chords use their short arc, the remaining b their long arc."""
    if A.cycles is None:
        raise ValueError("auxiliary graph has no stored cycles to lift through")
    a, _ = solve_path_mix(sigma, len(path) - 1, A.L1, A.L2)
    index = A.graph.edge_index
    out = [path[0]]
    for t, (x, y) in enumerate(zip(path, path[1:])):
        rec = A.cycles[index[norm_edge(x, y)]]
        arc = rec.arc_short if t < a else rec.arc_long
        if arc[0] != x:
            arc = arc[::-1]
        out.extend(arc[1:])
    return out


def lift_embedding(A: AuxGraph, host: HostGraph, coloring: Sequence[int], paths: Sequence[Sequence[int]],
                   task: SubdivisionTask, branch: dict[int, int] | None = None) -> tuple[dict[int, int], Verdict]:
    """Expand each G-path (one per edge of H, from image(a) to image(b)) into
    a host path of length sigma(e) and verify the result. ``branch`` supplies
    images of isolated vertices of H, if any."""
    mapping: dict[int, int] = dict(branch or {})
    for i, path in enumerate(paths):
        hp = lift_path(A, path, task.sigma[i])
        labels = task.path_labels(i)
        assert len(labels) == len(hp)
        for x, y in zip(labels, hp):
            if mapping.setdefault(x, y) != y:
                raise AssertionError(f"branch vertex {x} lifted inconsistently")
    verdict = verify_subdivision_embedding(host, coloring, mapping, task)
    if not verdict.ok:
        raise AssertionError(f"lifted embedding failed verification: {verdict.notes} {verdict.witness}")
    return mapping, verdict
