"""Hand-built instances whose auxiliary graph is known in advance.

Every edge uv of a base graph B becomes the 6-uniform hyperedge
{u, x1, v, x2, x3, x4} with four private vertices, and a 6-cycle gadget is
placed in the order u, x1, v, x2, x3, x4. Under a constant colouring the
chord of each copy is uv again, so the auxiliary graph equals B and
goodness reduces to graph properties of B (plain: always; induced: the
subgraph must be induced in B).
"""

from __future__ import annotations

from .auxgraph import AuxGraph, extract_aux
from .gadgets import Gadget, HostGraph, build_host, constant_coloring, cycle_graph
from .hypercore import Graph, Hypergraph


def blowup(B: Graph, mode: str = "plain", color: int = 0) -> tuple[HostGraph, tuple[int, ...], AuxGraph]:
    n = B.n_vertices
    edges = []
    placement = []
    nxt = n
    for u, v in B.edges:
        x = list(range(nxt, nxt + 4))
        nxt += 4
        edges.append(tuple(sorted((u, v, *x))))
        placement.append((u, x[0], v, x[1], x[2], x[3]))
    H = Hypergraph(nxt, 6, tuple(edges))
    F = Gadget(cycle_graph(6), 6, mode == "induced", "even", 1, "synthetic 6-cycle")
    host = build_host(H, F, placement)
    coloring = constant_coloring(host, color)
    A = extract_aux(host, coloring, mode, "even")
    return host, coloring, A


def grid_graph(w: int, h: int) -> Graph:
    E = []
    for i in range(h):
        for j in range(w):
            v = i * w + j
            if j + 1 < w:
                E.append((v, v + 1))
            if i + 1 < h:
                E.append((v, v + w))
    return Graph(w * h, tuple(E))


def circulant(n: int, steps) -> Graph:
    E = set()
    for v in range(n):
        for t in steps:
            u = (v + t) % n
            if u != v:
                E.add((min(u, v), max(u, v)))
    return Graph(n, tuple(sorted(E)))


def random_regular(n: int, d: int, seed: int = 0) -> Graph:
    import networkx as nx

    g = nx.random_regular_graph(d, n, seed=seed)
    return Graph(n, tuple(sorted((min(u, v), max(u, v)) for u, v in g.edges())))
