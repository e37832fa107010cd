"""Gadget graphs, monochromatic cycle extraction and the substitution H(F).

A gadget F is a small graph on s vertices that is (claimed to be) k-Ramsey for
a short cycle. Substitution places a copy of F on every hyperedge of a linear
hypergraph; the resulting host graph is what gets colored.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .hypercore import Graph, Hypergraph, is_linear, norm_edge
from .rng import stream

# Orders of complete gadgets for the plain/even case at small k. K6 trivially
# holds a 6-cycle in one colour; R(C6, C6) = 8 gives K8 for two colours.
EVEN_ORDER_TABLE = {1: 6, 2: 8}
# Order constant for K_{ceil(C k^{3/2})} beyond the table. Not pinned down by
# the analysis; exposed as a knob.
GADGET_ORDER_CONSTANT = 3.0

MAX_GADGET_CYCLES = 200_000


class GadgetUnavailable(ValueError):
    pass


@dataclass(frozen=True)
class Gadget:
    graph: Graph
    ell: int
    induced: bool
    case: str  # even | general
    claims_k: int
    claim: str = ""

    def __post_init__(self):
        if self.ell < 3:
            raise ValueError("target cycle length must be >= 3")
        if self.case not in ("even", "general"):
            raise ValueError(f"bad case {self.case!r}")

    @property
    def s(self) -> int:
        return self.graph.n_vertices

    @property
    def exact_length(self) -> bool:
        """False only in plain-general mode, where any odd length <= ell counts."""
        return self.induced or self.case == "even"

    def to_json(self) -> dict:
        d = self.graph.to_json()
        d.update({"ell": self.ell, "induced": self.induced, "claims_k": self.claims_k, "case": self.case,
                  "claim": self.claim})
        return d

    @classmethod
    def from_json(cls, data: dict) -> "Gadget":
        g = Graph.from_json({"n": data["n"], "edges": data["edges"]})
        ell = int(data["ell"])
        case = data.get("case") or ("even" if ell % 2 == 0 else "general")
        return cls(g, ell, bool(data["induced"]), case, int(data["claims_k"]), data.get("claim", "user-supplied"))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple(combinations(range(n), 2)))


def cycle_graph(n: int) -> Graph:
    return Graph(n, tuple(norm_edge(i, (i + 1) % n) for i in range(n)))


def odd_cycle_bound(k: int) -> int:
    # k = 1 gives 1 under the raw formula; a triangle is the shortest odd cycle
    return max(3, 2 * math.ceil(math.log2(k)) + 1) if k > 1 else 3


LIBRARY = {
    ("even", 1): lambda: Gadget(cycle_graph(6), 6, True, "even", 1, "C6 is induced 1-Ramsey for C6"),
    ("general", 1): lambda: Gadget(cycle_graph(5), 5, True, "general", 1, "C5 is induced 1-Ramsey for C5"),
}


def make_gadget(k: int, mode: str, case: str, override_order: int | None = None, supplied: Gadget | None = None) -> Gadget:
    if k < 1:
        raise ValueError("k must be >= 1")
    if mode == "plain" and case == "even":
        n = override_order or EVEN_ORDER_TABLE.get(k) or math.ceil(GADGET_ORDER_CONSTANT * k ** 1.5)
        src = "order table" if override_order is None and k in EVEN_ORDER_TABLE else "configured order"
        return Gadget(complete_graph(n), 6, False, "even", k, f"K{n} claimed {k}-Ramsey for C6 ({src})")
    if mode == "plain" and case == "general":
        n = override_order or 4 ** k + 1
        b = odd_cycle_bound(k)
        return Gadget(complete_graph(n), b, False, "general", k,
                      f"K{n} claimed to force a monochromatic odd cycle of length <= {b} under {k} colours")
    if mode == "induced":
        if supplied is not None:
            if not supplied.induced:
                raise ValueError("supplied gadget is not marked induced")
            return supplied
        if override_order is not None:
            raise GadgetUnavailable("induced gadgets cannot be sized by order; supply a gadget file")
        make = LIBRARY.get((case, k))
        if make is None:
            raise GadgetUnavailable(f"gadget unavailable: no built-in induced gadget for case={case}, k={k}")
        return make()
    raise ValueError(f"bad mode/case {mode!r}/{case!r}")


# ------------------------------------------------------------ cycle search


@dataclass(frozen=True)
class MonoCycle:
    vertices: tuple[int, ...]
    color: int

    @property
    def length(self) -> int:
        return len(self.vertices)


def _color_adjacency(F: Graph) -> dict[int, list[list[int]]]:
    by_color: dict[int, list[list[int]]] = {}
    for (u, v), c in zip(F.edges, F.colors):
        adj = by_color.setdefault(c, [[] for _ in range(F.n_vertices)])
        adj[u].append(v)
        adj[v].append(u)
    for adj in by_color.values():
        for a in adj:
            a.sort()
    return by_color


def _first_cycle(adj: Sequence[Sequence[int]], full: Graph, ell: int, induced: bool) -> tuple[int, ...] | None:
    """Lexicographically smallest cycle of length ``ell`` written from its
    smallest vertex with second vertex < last vertex."""
    n = len(adj)
    fadj = [set(full.neighbors(v)) for v in range(n)] if induced else None
    nbr = [set(a) for a in adj]
    for v0 in range(n):
        path = [v0]
        on = {v0}

        def dfs() -> bool:
            last = path[-1]
            if len(path) == ell:
                return v0 in nbr[last] and path[1] < last
            for w in adj[last]:
                if w <= v0 or w in on:
                    continue
                if induced:
                    pos = len(path)  # index w would take
                    bad = False
                    for i, p in enumerate(path[:-1]):
                        if p in fadj[w] and not (i == 0 and pos == ell - 1):
                            bad = True
                            break
                    if bad:
                        continue
                    if pos == ell - 1 and v0 not in fadj[w]:
                        continue
                path.append(w)
                on.add(w)
                if dfs():
                    return True
                path.pop()
                on.discard(w)
            return False

        if dfs():
            return tuple(path)
    return None


def find_mono_cycle(F_colored: Graph, ell: int, induced_required: bool, exact: bool = True) -> MonoCycle | None:
    """Monochromatic cycle in a coloured gadget.

    With ``exact`` the length is exactly ``ell``; otherwise the shortest odd
    length <= ``ell`` that occurs is used. Among cycles of the chosen length
    the result is the lexicographically smallest (vertex tuple, colour).
    """
    if F_colored.colors is None:
        raise ValueError("gadget copy must be coloured")
    lengths = [ell] if exact else list(range(3, ell + 1, 2))
    by_color = _color_adjacency(F_colored)
    for L in lengths:
        best = None
        for c in sorted(by_color):
            cyc = _first_cycle(by_color[c], F_colored, L, induced_required)
            if cyc is not None and (best is None or (cyc, c) < (best.vertices, best.color)):
                best = MonoCycle(cyc, c)
        if best is not None:
            return best
    return None


def check_mono_cycle(F_colored: Graph, cyc: MonoCycle, induced_required: bool) -> bool:
    vs = cyc.vertices
    if len(set(vs)) != len(vs) or len(vs) < 3:
        return False
    for a, b in zip(vs, vs[1:] + vs[:1]):
        if not F_colored.has_edge(a, b) or F_colored.color_of(a, b) != cyc.color:
            return False
    if induced_required:
        cyc_edges = {norm_edge(a, b) for a, b in zip(vs, vs[1:] + vs[:1])}
        for a, b in combinations(vs, 2):
            if F_colored.has_edge(a, b) and norm_edge(a, b) not in cyc_edges:
                return False
    return True


def most_frequent_odd_length(lengths: Iterable[int]) -> int:
    counts = Counter(lengths)
    if not counts:
        raise ValueError("no cycle lengths given")
    top = max(counts.values())
    return min(L for L, c in counts.items() if c == top)


# ------------------------------------------------------------ substitution


@dataclass(frozen=True)
class HostGraph:
    hypergraph: Hypergraph
    graph: Graph
    placement: tuple[tuple[int, ...], ...]  # hyperedge -> (gadget vertex i -> host vertex)
    edge_provenance: tuple[int, ...]  # parallel to graph.edges
    gadget: Gadget

    def copy_edges(self, idx: int) -> list[tuple[int, int, int]]:
        """(gadget edge index, host u, host v) for every edge of copy ``idx``."""
        pl = self.placement[idx]
        return [(j, pl[a], pl[b]) for j, (a, b) in enumerate(self.gadget.graph.edges)]

    def to_json(self) -> dict:
        return {
            "hypergraph": self.hypergraph.to_json(),
            "graph": self.graph.to_json(),
            "placement": [list(p) for p in self.placement],
            "edge_provenance": list(self.edge_provenance),
            "gadget": self.gadget.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "HostGraph":
        H = Hypergraph.from_json(d["hypergraph"])
        F = Gadget.from_json(d["gadget"])
        return build_host(H, F, tuple(tuple(p) for p in d["placement"]))


def build_host(H: Hypergraph, F: Gadget, placement: Sequence[Sequence[int]]) -> HostGraph:
    if H.s != F.s:
        raise ValueError(f"gadget order {F.s} differs from uniformity {H.s}")
    if F.exact_length and F.ell > F.s:
        raise ValueError(f"cycle length {F.ell} exceeds gadget order {F.s}")
    if not is_linear(H):
        raise ValueError("substitution requires a linear hypergraph")
    owner: dict[tuple[int, int], int] = {}
    for idx, (e, pl) in enumerate(zip(H.edges, placement)):
        if sorted(pl) != list(e):
            raise ValueError(f"placement {idx} is not a bijection onto its hyperedge")
        for a, b in F.graph.edges:
            key = norm_edge(pl[a], pl[b])
            if key in owner:
                raise ValueError(f"host edge {key} claimed by hyperedges {owner[key]} and {idx}")
            owner[key] = idx
    g = Graph(H.n_vertices, tuple(owner))
    prov = tuple(owner[e] for e in g.edges)
    return HostGraph(H, g, tuple(tuple(p) for p in placement), prov, F)


def substitute(H: Hypergraph, F: Gadget, seed: int = 0) -> HostGraph:
    rng = stream(seed, "placement")
    placement = []
    for e in H.edges:
        perm = list(e)
        rng.shuffle(perm)
        placement.append(tuple(perm))
    return build_host(H, F, placement)


def copy_colored(host: HostGraph, coloring: Sequence[int], idx: int) -> tuple[Graph, tuple[int, ...]]:
    """Coloured copy of hyperedge ``idx``'s gadget, relabelled to 0..s-1 in
    sorted host-vertex order. Returns the graph and the local->host labels."""
    verts = host.hypergraph.edges[idx]
    local = {v: i for i, v in enumerate(verts)}
    index = host.graph.edge_index
    edges, colors = [], []
    for _, u, v in host.copy_edges(idx):
        edges.append(norm_edge(local[u], local[v]))
        colors.append(coloring[index[norm_edge(u, v)]])
    return Graph(len(verts), tuple(edges), tuple(colors)), tuple(verts)


# ------------------------------------------------------------ colourings


def uniform_coloring(host: HostGraph, k: int, seed: int = 0) -> tuple[int, ...]:
    rng = stream(seed, "coloring", "uniform")
    return tuple(rng.randrange(k) for _ in host.graph.edges)


def _gadget_cycles(F: Gadget) -> list[tuple[int, ...]]:
    """Every cycle the gadget must protect against, as tuples of gadget edge indices."""
    g = F.graph
    index = g.edge_index
    lengths = [F.ell] if F.exact_length else list(range(3, F.ell + 1, 2))
    out = []
    n = g.n_vertices
    adj = [g.neighbors(v) for v in range(n)]
    for L in lengths:
        for v0 in range(n):
            path = [v0]

            def dfs():
                last = path[-1]
                if len(path) == L:
                    if v0 in adj[last] and path[1] < last:
                        ring = path + [v0]
                        out.append(tuple(index[norm_edge(a, b)] for a, b in zip(ring, ring[1:])))
                        if len(out) > MAX_GADGET_CYCLES:
                            raise ValueError("gadget has too many target cycles for the adversarial heuristic")
                    return
                for w in adj[last]:
                    if w > v0 and w not in path:
                        path.append(w)
                        dfs()
                        path.pop()

            dfs()
    return out


def adversarial_coloring(host: HostGraph, k: int, seed: int = 0) -> tuple[int, ...]:
    """Per gadget copy, colour edges greedily so as to close as few
    monochromatic target cycles as possible. A stress heuristic only."""
    F = host.gadget
    cycles = _gadget_cycles(F)
    through: list[list[int]] = [[] for _ in F.graph.edges]
    for ci, cyc in enumerate(cycles):
        for j in cyc:
            through[j].append(ci)
    index = host.graph.edge_index
    colors = [0] * host.graph.n_edges
    for idx in range(host.hypergraph.n_edges):
        rng = stream(seed, "coloring", "adversarial", idx)
        order = list(range(F.graph.n_edges))
        rng.shuffle(order)
        local: dict[int, int] = {}
        for j in order:
            best_c, best_score = None, None
            offset = rng.randrange(k)
            for t in range(k):
                c = (t + offset) % k
                score = 0
                for ci in through[j]:
                    if all(local.get(x) == c for x in cycles[ci] if x != j):
                        score += 1
                if best_score is None or score < best_score:
                    best_c, best_score = c, score
            local[j] = best_c
        for j, u, v in host.copy_edges(idx):
            colors[index[norm_edge(u, v)]] = local[j]
    return tuple(colors)


def constant_coloring(host: HostGraph, color: int = 0) -> tuple[int, ...]:
    return tuple(color for _ in host.graph.edges)


# ------------------------------------------------------------ tiny verification


@dataclass
class RamseyVerdict:
    status: str  # proved | refuted | inconclusive
    witness: tuple[int, ...] | None = None
    nodes: int = 0

    def to_json(self) -> dict:
        return {"status": self.status, "witness": None if self.witness is None else list(self.witness), "nodes": self.nodes}


def verify_ramsey_tiny(F: Gadget, k: int, budget: int = 100_000) -> RamseyVerdict:
    """Exhaustive search for a k-colouring of E(F) avoiding the gadget's
    target monochromatic cycle. Colour permutations are pruned by only
    allowing a new colour index one above the largest so far. A branch is
    closed as soon as its latest edge completes a target cycle."""
    g = F.graph
    m = g.n_edges
    cycles = _gadget_cycles(F)
    if F.induced:
        keep = []
        for cyc in cycles:
            vs = set()
            for j in cyc:
                vs.update(g.edges[j])
            if len(g.induced_edges(vs)) == len(cyc):
                keep.append(cyc)
        cycles = keep
    # cycles checked when their largest edge index is coloured
    closing: list[list[tuple[int, ...]]] = [[] for _ in range(m)]
    for cyc in cycles:
        closing[max(cyc)].append(cyc)
    coloring = [-1] * m
    nodes = 0

    def rec(i: int, used: int) -> str | None:
        nonlocal nodes
        if i == m:
            return "refuted"
        for c in range(min(k, used + 1)):
            nodes += 1
            if nodes > budget:
                return "budget"
            coloring[i] = c
            hit = any(all(coloring[j] == c for j in cyc) for cyc in closing[i])
            if not hit:
                r = rec(i + 1, max(used, c + 1))
                if r is not None:
                    return r
            coloring[i] = -1
        return None

    if m == 0:
        return RamseyVerdict("refuted", (), 0)
    r = rec(0, 0)
    if r == "refuted":
        return RamseyVerdict("refuted", tuple(coloring), nodes)
    if r == "budget":
        return RamseyVerdict("inconclusive", None, nodes)
    return RamseyVerdict("proved", None, nodes)
