"""Hypergraph and graph primitives shared by every stage of the pipeline.

Vertices and hyperedges are dense integer indices. A hyperedge's identity is
its position in ``Hypergraph.edges``; every provenance map downstream keys on
that position.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

Edge = tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Hypergraph:
    n_vertices: int
    s: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.s < 2:
            raise ValueError(f"uniformity must be >= 2, got {self.s}")
        fixed = []
        for i, e in enumerate(self.edges):
            t = tuple(sorted(e))
            if len(set(t)) != self.s or len(t) != self.s:
                raise ValueError(f"hyperedge {i} = {e} does not have {self.s} distinct vertices")
            if t[0] < 0 or t[-1] >= self.n_vertices:
                raise ValueError(f"hyperedge {i} = {e} has a vertex outside [0, {self.n_vertices})")
            fixed.append(t)
        object.__setattr__(self, "edges", tuple(fixed))

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[Iterable[int]], s: int | None = None) -> "Hypergraph":
        edges = [tuple(e) for e in edges]
        if s is None:
            if not edges:
                raise ValueError("cannot infer uniformity of an empty hypergraph")
            s = len(edges[0])
        return cls(n_vertices, s, tuple(edges))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def incidence(self) -> tuple[tuple[int, ...], ...]:
        """Vertex -> sorted tuple of incident hyperedge indices."""
        inc: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, e in enumerate(self.edges):
            for v in e:
                inc[v].append(i)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def edge_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(e) for e in self.edges)

    def degree(self, v: int) -> int:
        return len(self.incidence[v])

    def max_degree(self) -> int:
        return max((len(x) for x in self.incidence), default=0)

    def subhypergraph(self, keep: Iterable[int]) -> "Hypergraph":
        """Hypergraph on the same vertex set keeping the listed hyperedge indices (in order)."""
        return Hypergraph(self.n_vertices, self.s, tuple(self.edges[i] for i in keep))

    def to_json(self) -> dict:
        return {"n": self.n_vertices, "s": self.s, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, data: dict) -> "Hypergraph":
        return cls(int(data["n"]), int(data["s"]), tuple(tuple(e) for e in data["edges"]))


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph, optionally edge-colored.

    ``edges`` is stored sorted with ``u < v`` inside each pair; ``colors`` (when
    given) runs parallel to ``edges`` after that normalization.
    """

    n_vertices: int
    edges: tuple[Edge, ...]
    colors: tuple[int, ...] | None = None

    def __post_init__(self):
        pairs = [norm_edge(int(u), int(v)) for u, v in self.edges]
        for u, v in pairs:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if u < 0 or v >= self.n_vertices:
                raise ValueError(f"edge {(u, v)} outside [0, {self.n_vertices})")
        if self.colors is not None:
            if len(self.colors) != len(pairs):
                raise ValueError("colors must be parallel to edges")
            order = sorted(range(len(pairs)), key=lambda i: pairs[i])
            colors = tuple(int(self.colors[i]) for i in order)
            pairs = [pairs[i] for i in order]
            object.__setattr__(self, "colors", colors)
        else:
            pairs.sort()
        for a, b in zip(pairs, pairs[1:]):
            if a == b:
                raise ValueError(f"parallel edge {a}")
        object.__setattr__(self, "edges", tuple(pairs))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return norm_edge(u, v) in self.edge_index

    def color_of(self, u: int, v: int) -> int:
        if self.colors is None:
            raise ValueError("graph is uncolored")
        return self.colors[self.edge_index[norm_edge(u, v)]]

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def non_isolated(self) -> list[int]:
        return [v for v in range(self.n_vertices) if self.adjacency[v]]

    def induced_edges(self, vertices: Iterable[int]) -> list[Edge]:
        vs = set(vertices)
        return [e for e in self.edges if e[0] in vs and e[1] in vs]

    def induced_subgraph(self, vertices: Iterable[int]) -> "Graph":
        """Subgraph induced on ``vertices``; vertex labels are kept (not relabelled)."""
        vs = set(vertices)
        keep = [i for i, (u, v) in enumerate(self.edges) if u in vs and v in vs]
        colors = None if self.colors is None else tuple(self.colors[i] for i in keep)
        return Graph(self.n_vertices, tuple(self.edges[i] for i in keep), colors)

    def to_json(self) -> dict:
        out: dict = {"n": self.n_vertices, "edges": [list(e) for e in self.edges]}
        if self.colors is not None:
            out["colors"] = list(self.colors)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Graph":
        colors = data.get("colors")
        return cls(
            int(data["n"]),
            tuple((int(u), int(v)) for u, v in data["edges"]),
            None if colors is None else tuple(int(c) for c in colors),
        )


@dataclass(frozen=True)
class BergeCycle:
    """Alternating sequence v1 E1 v2 E2 ... vk Ek (vertices, hyperedge indices)."""

    vertices: tuple[int, ...]
    edges: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.vertices)

    def is_valid(self, H: Hypergraph) -> bool:
        k = len(self.vertices)
        if k < 2 or len(self.edges) != k:
            return False
        if len(set(self.vertices)) != k or len(set(self.edges)) != k:
            return False
        if any(not 0 <= e < H.n_edges for e in self.edges):
            return False
        sets = H.edge_sets
        for i, v in enumerate(self.vertices):
            # v_i sits in E_{i-1} and E_i (indices mod k)
            if v not in sets[self.edges[i - 1]] or v not in sets[self.edges[i]]:
                return False
        return True


def _shortest_cycle_through(
    H: Hypergraph, e: int, limit: int, alive: Sequence[bool] | None = None, want_witness: bool = False
) -> tuple[int | None, BergeCycle | None]:
    """Shortest Berge cycle using hyperedge ``e``, restricted to length <= ``limit``.

    A cycle of length p+1 through ``e`` is a shortest path of length p in
    ``H - e`` between two distinct vertices of ``e``. Grow a Voronoi BFS from
    all vertices of ``e`` at once; every vertex of that path lies within
    floor(p/2) of some source, so radius floor((limit-1)/2) suffices, and the
    path crosses between two Voronoi cells inside some hyperedge.
    """
    inc = H.incidence
    edges = H.edges
    if not want_witness:
        return _cycle_exists_through(H, e, limit, alive), None
    label: dict[int, int] = {v: v for v in edges[e]}
    dist: dict[int, int] = {v: 0 for v in edges[e]}
    parent: dict[int, tuple[int, int]] = {}
    radius = (limit - 1) // 2
    frontier = sorted(edges[e])
    touched: set[int] = set()
    for depth in range(radius + 1):
        nxt: list[int] = []
        for x in frontier:
            for f in inc[x]:
                if f == e or (alive is not None and not alive[f]):
                    continue
                touched.add(f)
                if depth == radius:
                    continue
                for w in edges[f]:
                    if w not in label:
                        label[w] = label[x]
                        dist[w] = depth + 1
                        parent[w] = (x, f)
                        nxt.append(w)
        frontier = nxt
    best = None
    best_key = None
    for f in sorted(touched):
        members = [w for w in edges[f] if w in label]
        for a, b in combinations(members, 2):
            if label[a] != label[b]:
                val = dist[a] + dist[b] + 1
                key = (val, f, a, b)
                if best_key is None or key < best_key:
                    best_key = key
                    best = val
    if best is None or best + 1 > limit:
        return None, None
    if not want_witness:
        return best + 1, None
    _, f, a, b = best_key

    def trace(x: int) -> tuple[list[int], list[int]]:
        vs, es = [x], []
        while x in parent:
            x, pf = parent[x][0], parent[x][1]
            es.append(pf)
            vs.append(x)
        return vs, es

    va, ea = trace(a)
    vb, eb = trace(b)
    verts = list(reversed(va)) + vb
    hedges = list(reversed(ea)) + [f] + eb + [e]
    return best + 1, BergeCycle(tuple(verts), tuple(hedges))


def _cycle_exists_through(H: Hypergraph, e: int, limit: int, alive: Sequence[bool] | None) -> int | None:
    """Existence-only variant of the Voronoi search; returns a length <= limit or None.

    Each crossing pair is seen when its later-labelled endpoint is expanded, so
    the first crossing found certifies a cycle; it need not be the shortest.
    """
    inc = H.incidence
    edges = H.edges
    label = {v: v for v in edges[e]}
    dist = {v: 0 for v in edges[e]}
    radius = (limit - 1) // 2
    frontier = list(edges[e])
    for depth in range(radius + 1):
        nxt = []
        for x in frontier:
            lx = label[x]
            for f in inc[x]:
                if f == e or (alive is not None and not alive[f]):
                    continue
                for w in edges[f]:
                    lw = label.get(w)
                    if lw is None:
                        if depth < radius:
                            label[w] = lx
                            dist[w] = depth + 1
                            nxt.append(w)
                    elif lw != lx and depth + dist[w] + 2 <= limit:
                        return depth + dist[w] + 2
        frontier = nxt
    return None


def berge_girth(H: Hypergraph, cap: int) -> tuple[int | None, BergeCycle | None]:
    """Minimum Berge-cycle length <= cap with a witness, or (None, None).

    Length-2 cycles are detected directly from shared-pair multiplicity.
    """
    if cap < 2:
        raise ValueError("cap must be >= 2")
    seen: dict[Edge, int] = {}
    for i, e in enumerate(H.edges):
        for p in combinations(e, 2):
            if p in seen:
                j = seen[p]
                return 2, BergeCycle((p[0], p[1]), (j, i))
            seen[p] = i
    best: int | None = None
    witness: BergeCycle | None = None
    for i in range(H.n_edges):
        lim = cap if best is None else best - 1
        if lim < 3:
            break
        length, cyc = _shortest_cycle_through(H, i, lim, want_witness=True)
        if length is not None:
            best, witness = length, cyc
    return best, witness


def is_linear(H: Hypergraph) -> bool:
    seen: set[Edge] = set()
    for e in H.edges:
        for p in combinations(e, 2):
            if p in seen:
                return False
            seen.add(p)
    return True


def _intersections(H: Hypergraph, A: set[int]) -> list[int]:
    """|h ∩ A| for each hyperedge meeting A at least twice."""
    counts: Counter[int] = Counter()
    inc = H.incidence
    for v in A:
        for f in inc[v]:
            counts[f] += 1
    return [c for c in counts.values() if c >= 2]


def check_sparsity_P4(H: Hypergraph, A: Iterable[int]) -> bool:
    """Sum of |h∩A| over hyperedges with |h∩A| >= 2 is < 5|A|/2 (empty A passes)."""
    A = set(A)
    if not A:
        return True
    return Fraction(sum(_intersections(H, A))) < Fraction(5, 2) * len(A)


def check_sparsity_P4prime(H: Hypergraph, A: Iterable[int]) -> bool:
    """At most 2|A| hyperedges meet A in two or more vertices."""
    A = set(A)
    return len(_intersections(H, A)) <= 2 * len(A)


def sparsity_P4_sum(H: Hypergraph, A: Iterable[int]) -> int:
    return sum(_intersections(H, set(A)))


def check_edge_sparsity_Q2(G: Graph, A: Iterable[int], ratio: Fraction | float = Fraction(5, 4)) -> bool:
    A = set(A)
    inside = sum(1 for u, v in G.edges if u in A and v in A)
    return Fraction(inside) <= Fraction(ratio) * len(A)


def dump_json(obj: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
