"""Brute-force reference checks for small instances.

Nothing here imports the modules it validates beyond the plain data types.
Every function has a hard size guard; exceeding it raises ``OracleSizeError``
instead of silently sampling.

Size guards
-----------
==========================  =======================================
brute_girth                 <= 8 hyperedges or <= 20 vertices
brute_transversal           ground set <= 20
brute_find_mono_subdivision host has <= 14 vertices
brute_mono_cycle            gadget has <= 10 vertices
verify_expander             <= 18 vertices
==========================  =======================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Any, Iterable, Mapping, Sequence

from .hypercore import Graph, Hypergraph, norm_edge

GIRTH_MAX_EDGES = 8
GIRTH_MAX_VERTICES = 20
TRANSVERSAL_MAX_GROUND = 20
SUBDIVISION_MAX_HOST = 14
EXPANDER_MAX_VERTICES = 18
MONO_CYCLE_MAX_VERTICES = 10


class OracleSizeError(ValueError):
    pass


@dataclass
class Verdict:
    ok: bool
    witness: Any = None
    notes: str = ""
    data: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"ok": self.ok, "witness": self.witness, "notes": self.notes, **({"data": self.data} if self.data else {})}


def brute_girth(H: Hypergraph) -> int | None:
    """Shortest Berge cycle by enumerating vertex/edge alternating sequences."""
    if H.n_edges > GIRTH_MAX_EDGES and H.n_vertices > GIRTH_MAX_VERTICES:
        raise OracleSizeError("brute_girth size guard exceeded")
    sets = [set(e) for e in H.edges]
    m = len(sets)
    best = None
    for k in range(2, m + 1):
        for es in combinations(range(m), k):
            for perm in permutations(es[1:]):
                order = (es[0],) + perm
                # v_i must lie in order[i-1] ∩ order[i], all distinct
                choices = [sets[order[i - 1]] & sets[order[i]] for i in range(k)]
                if _distinct_choice(choices, 0, set()):
                    return k
    return best


def _distinct_choice(choices: Sequence[set], i: int, used: set) -> bool:
    if i == len(choices):
        return True
    for v in choices[i]:
        if v not in used:
            used.add(v)
            if _distinct_choice(choices, i + 1, used):
                return True
            used.discard(v)
    return False


def brute_transversal(family: Iterable[Iterable]) -> int:
    fam = [frozenset(f) for f in family]
    ground = sorted(set().union(*fam), key=repr) if fam else []
    if len(ground) > TRANSVERSAL_MAX_GROUND:
        raise OracleSizeError("brute_transversal size guard exceeded")
    if not fam:
        return 0
    for size in range(len(ground) + 1):
        for T in combinations(ground, size):
            T = set(T)
            if all(f & T for f in fam):
                return size
    raise ValueError("family contains an empty set; no transversal exists")


def verify_expander(G: Graph, gamma, vertices: Iterable[int] | None = None) -> Verdict:
    V = sorted(range(G.n_vertices) if vertices is None else set(vertices))
    if len(V) > EXPANDER_MAX_VERTICES:
        raise OracleSizeError("verify_expander size guard exceeded")
    Vs = set(V)
    adj = {v: {u for u in G.neighbors(v) if u in Vs} for v in V}
    for size in range(1, len(V) // 2 + 1):
        for S in combinations(V, size):
            Sset = set(S)
            nb = set().union(*(adj[v] for v in S)) - Sset
            if len(nb) < gamma * size:
                return Verdict(False, sorted(S), f"|N(S)|={len(nb)} < {gamma}*{size}")
    return Verdict(True)


def brute_mono_cycle(F: Graph, ell: int, induced: bool) -> tuple[tuple[int, ...], int] | None:
    """Smallest (cycle, colour) over all vertex permutations of length ``ell``.

    Cycles are written from their smallest vertex with the second vertex
    below the last, so each cycle has exactly one spelling.
    """
    n = F.n_vertices
    if n > MONO_CYCLE_MAX_VERTICES:
        raise OracleSizeError("brute_mono_cycle size guard exceeded")
    color = {e: c for e, c in zip(F.edges, F.colors)}
    best = None
    for seq in permutations(range(n), ell):
        if seq[0] != min(seq) or seq[1] > seq[-1]:
            continue
        ring = [norm_edge(a, b) for a, b in zip(seq, seq[1:] + seq[:1])]
        cols = {color.get(e) for e in ring}
        if len(cols) != 1 or None in cols:
            continue
        if induced:
            inside = {norm_edge(a, b) for a, b in combinations(seq, 2)} & set(color)
            if inside != set(ring):
                continue
        cand = (seq, cols.pop())
        if best is None or cand < best:
            best = cand
    return best


# ------------------------------------------------------------ subdivisions


def _subdivided_paths(task) -> list[list[int]]:
    """Vertex sequence (in H^sigma labels) of each subdivided edge, in H edge order."""
    return [task.path_labels(i) for i in range(task.base.n_edges)]


def verify_subdivision_embedding(host, coloring: Sequence[int], mapping: Mapping[int, int], task, induced: bool | None = None) -> Verdict:
    """Check that ``mapping`` embeds H^sigma into the host as a monochromatic
    (and, in induced mode, induced) subgraph.

    ``host`` only needs ``graph`` (a Graph); ``coloring`` is parallel to
    ``host.graph.edges``.
    """
    graph: Graph = host.graph if hasattr(host, "graph") else host
    if induced is None:
        induced = task.mode == "induced"
    labels = list(range(task.n_subdivided))
    missing = [x for x in labels if x not in mapping]
    if missing:
        return Verdict(False, {"unmapped": missing[:10]}, "mapping not total")
    image = [mapping[x] for x in labels]
    if len(set(image)) != len(image):
        seen: dict[int, int] = {}
        for x in labels:
            y = mapping[x]
            if y in seen:
                return Verdict(False, {"collision": [seen[y], x], "vertex": y}, "mapping not injective")
            seen[y] = x
    if any(not 0 <= y < graph.n_vertices for y in image):
        return Verdict(False, {"out_of_range": [y for y in image if not 0 <= y < graph.n_vertices][:5]}, "bad vertex")
    index = graph.edge_index
    color = None
    image_edges: set = set()
    for i, path in enumerate(_subdivided_paths(task)):
        if len(path) - 1 != task.sigma[i]:
            return Verdict(False, {"edge": i}, "path length differs from sigma")
        for x, y in zip(path, path[1:]):
            e = norm_edge(mapping[x], mapping[y])
            if e not in index:
                return Verdict(False, {"pair": [x, y], "host_pair": list(e)}, "subdivision edge missing in host")
            c = coloring[index[e]]
            if color is None:
                color = c
            elif c != color:
                return Verdict(False, {"pair": [x, y], "colors": [color, c]}, "not monochromatic")
            image_edges.add(e)
    if induced:
        img = set(image)
        for v in image:
            for u in graph.neighbors(v):
                if u in img and v < u and (v, u) not in image_edges:
                    return Verdict(False, {"chord": [v, u]}, "host edge between image vertices outside the image")
    return Verdict(True, None, f"color={color}", {"color": color})


def brute_find_mono_subdivision(host, coloring: Sequence[int], task) -> Verdict:
    """Exhaustive search for a monochromatic (induced) copy of H^sigma."""
    graph: Graph = host.graph if hasattr(host, "graph") else host
    if graph.n_vertices > SUBDIVISION_MAX_HOST:
        raise OracleSizeError("brute_find_mono_subdivision size guard exceeded")
    induced = task.mode == "induced"
    n = task.n_subdivided
    pattern_edges = set()
    for path in _subdivided_paths(task):
        for x, y in zip(path, path[1:]):
            pattern_edges.add(norm_edge(x, y))
    padj: dict[int, set[int]] = {x: set() for x in range(n)}
    for x, y in pattern_edges:
        padj[x].add(y)
        padj[y].add(x)
    # order pattern vertices so each (after the first of its component) has a mapped neighbour
    order: list[int] = []
    seen: set[int] = set()
    for start in range(n):
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        while stack:
            x = stack.pop(0)
            order.append(x)
            for y in sorted(padj[x]):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
    colors = sorted(set(coloring))
    all_adj = {v: set(graph.neighbors(v)) for v in range(graph.n_vertices)}
    for c in colors:
        cadj: dict[int, set[int]] = {v: set() for v in range(graph.n_vertices)}
        for (u, v), cc in zip(graph.edges, coloring):
            if cc == c:
                cadj[u].add(v)
                cadj[v].add(u)
        phi: dict[int, int] = {}
        used: set[int] = set()

        def extend(i: int) -> bool:
            if i == n:
                return True
            x = order[i]
            for y in range(graph.n_vertices):
                if y in used:
                    continue
                ok = True
                for z, w in phi.items():
                    if z in padj[x]:
                        if w not in cadj[y]:
                            ok = False
                            break
                    elif induced and w in all_adj[y]:
                        ok = False
                        break
                if not ok:
                    continue
                phi[x] = y
                used.add(y)
                if extend(i + 1):
                    return True
                del phi[x]
                used.discard(y)
            return False

        if extend(0):
            return Verdict(True, dict(phi), f"color={c}")
    return Verdict(False, None, "no monochromatic copy")
