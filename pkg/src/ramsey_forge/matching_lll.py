"""Hypergraph matchings under a Haxell-type condition, exact transversal
numbers, degeneracy orientations and the resampling stable-set selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Hashable, Iterable, Sequence

from .hypercore import norm_edge
from .rng import stream

TRANSVERSAL_EXACT_LIMIT = 24


class SearchBudgetExceeded(RuntimeError):
    def __init__(self, msg: str, stats: dict):
        super().__init__(msg)
        self.stats = stats


class DegeneracyError(ValueError):
    def __init__(self, d: int, witness: list[int]):
        super().__init__(f"graph is not {d}-degenerate; subgraph on {len(witness)} vertices has min degree > {d}")
        self.witness = witness


class LLLExhausted(RuntimeError):
    def __init__(self, msg: str, stats: dict):
        super().__init__(msg)
        self.stats = stats


@dataclass(frozen=True)
class BipartiteHypergraph:
    X: tuple[Hashable, ...]
    Y: tuple[Hashable, ...]
    edges: tuple[frozenset, ...]

    def __post_init__(self):
        X, Y = set(self.X), set(self.Y)
        if X & Y:
            raise ValueError("X and Y must be disjoint")
        edges = tuple(frozenset(e) for e in self.edges)
        for e in edges:
            if len(e & X) != 1:
                raise ValueError(f"hyperedge {sorted(e, key=repr)} must meet X in exactly one vertex")
            if not e - X <= Y:
                raise ValueError("hyperedge leaves X u Y")
        object.__setattr__(self, "edges", edges)

    @property
    def uniformity(self) -> int:
        sizes = {len(e) for e in self.edges}
        return max(sizes) if sizes else 0

    def x_of(self, i: int):
        (x,) = self.edges[i] & set(self.X)
        return x

    def to_json(self) -> dict:
        return {"x": list(self.X), "y": list(self.Y), "edges": [sorted(e, key=repr) for e in self.edges]}

    @classmethod
    def from_json(cls, d: dict) -> "BipartiteHypergraph":
        return cls(tuple(d["x"]), tuple(d["y"]), tuple(frozenset(e) for e in d["edges"]))


@dataclass(frozen=True)
class DMatching:
    selected: tuple[int, ...]
    D: int

    def check(self, B: BipartiteHypergraph) -> bool:
        count = {x: 0 for x in B.X}
        used: set = set()
        X = set(B.X)
        for i in self.selected:
            e = B.edges[i]
            (x,) = e & X
            count[x] += 1
            rest = e - X
            if used & rest:
                return False
            used |= rest
        return len(set(self.selected)) == len(self.selected) and all(c == self.D for c in count.values())


def neighborhood_family(B: BipartiteHypergraph, I: Iterable) -> set[frozenset]:
    I = set(I)
    X = set(B.X)
    return {e - X for e in B.edges if e & I}


def transversal_number(family: Iterable[Iterable]) -> int:
    """Exact minimum hitting set by branch and bound on an unhit set of
    minimum size, pruned with a disjoint-packing lower bound."""
    fam = list({frozenset(f) for f in family})
    if not fam:
        return 0
    if any(not f for f in fam):
        raise ValueError("family contains the empty set")
    ground = set().union(*fam)
    if len(ground) > TRANSVERSAL_EXACT_LIMIT:
        raise ValueError(f"exact bound exceeded: ground set has {len(ground)} > {TRANSVERSAL_EXACT_LIMIT} elements")
    best = len(ground)

    def packing_bound(sets: list[frozenset]) -> int:
        used: set = set()
        n = 0
        for f in sorted(sets, key=len):
            if not f & used:
                used |= f
                n += 1
        return n

    def rec(sets: list[frozenset], chosen: int):
        nonlocal best
        if not sets:
            best = min(best, chosen)
            return
        if chosen + packing_bound(sets) >= best:
            return
        pivot = min(sets, key=lambda f: (len(f), sorted(map(repr, f))))
        for v in sorted(pivot, key=repr):
            rec([f for f in sets if v not in f], chosen + 1)

    rec(fam, 0)
    return best


@dataclass
class HaxellVerdict:
    ok: bool
    levels: dict[int, bool]
    violating: tuple | None
    complete: bool

    def to_json(self) -> dict:
        return {"ok": self.ok, "levels": {str(k): v for k, v in self.levels.items()},
                "violating": None if self.violating is None else list(self.violating), "complete": self.complete}


def haxell_condition(B: BipartiteHypergraph, D: int = 1, subset_cap: int = 5) -> HaxellVerdict:
    s = B.uniformity
    X = sorted(B.X, key=repr)
    levels: dict[int, bool] = {}
    violating = None
    top = min(subset_cap, len(X))
    for size in range(1, top + 1):
        ok = True
        for I in combinations(X, size):
            need = (2 * s - 3) * (D * size - 1) + 1
            if transversal_number(neighborhood_family(B, I)) < need:
                ok = False
                if violating is None:
                    violating = I
                break
        levels[size] = ok
    return HaxellVerdict(violating is None, levels, violating, top >= len(X))


def find_D_matching(B: BipartiteHypergraph, D: int, budget: int = 200_000) -> DMatching | None:
    """D-matching saturating X, or None when the search space is exhausted.

    Each x is split into D copies that must take distinct hyperedges; copies of
    the same x take hyperedges in increasing index order so each matching is
    visited once. Raises SearchBudgetExceeded past ``budget`` nodes.
    """
    Xset = set(B.X)
    X = sorted(B.X, key=repr)
    options = {x: [] for x in X}
    for i, e in enumerate(B.edges):
        (x,) = e & Xset
        options[x].append(i)
    rests = [e - Xset for e in B.edges]
    if any(len(options[x]) < D for x in X):
        return None
    slots = [(x, j) for x in X for j in range(D)]
    chosen: list[int] = []
    used: set = set()
    nodes = 0

    def rec(t: int) -> bool:
        nonlocal nodes
        if t == len(slots):
            return True
        x, j = slots[t]
        lo = chosen[-1] if j > 0 else -1
        for i in options[x]:
            if i <= lo or rests[i] & used:
                continue
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded("matching search budget exceeded", {"nodes": nodes, "depth": t, "slots": len(slots)})
            chosen.append(i)
            used.update(rests[i])
            if rec(t + 1):
                return True
            chosen.pop()
            used.difference_update(rests[i])
        return False

    if rec(0):
        M = DMatching(tuple(chosen), D)
        assert M.check(B)
        return M
    return None


# ------------------------------------------------------------ Lovasz Local Lemma selection


def degeneracy_orient(vertices: Iterable[int], edges: Iterable[tuple[int, int]], d: int) -> list[tuple[int, int]]:
    """Arcs (tail, head) with every in-degree <= d, obtained from a
    min-degree removal order; each edge points from the later-removed end to
    the earlier-removed one."""
    V = sorted(set(vertices))
    adj: dict[int, set[int]] = {v: set() for v in V}
    E = {norm_edge(u, v) for u, v in edges}
    for u, v in E:
        adj[u].add(v)
        adj[v].add(u)
    deg = {v: len(adj[v]) for v in V}
    alive = set(V)
    pos: dict[int, int] = {}
    while alive:
        v = min(alive, key=lambda x: (deg[x], x))
        if deg[v] > d:
            raise DegeneracyError(d, sorted(alive))
        pos[v] = len(pos)
        alive.discard(v)
        for u in adj[v]:
            if u in alive:
                deg[u] -= 1
    arcs = []
    for u, v in sorted(E):
        arcs.append((u, v) if pos[u] > pos[v] else (v, u))
    return arcs


def degeneracy(vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> int:
    V = sorted(set(vertices))
    adj: dict[int, set[int]] = {v: set() for v in V}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    deg = {v: len(adj[v]) for v in V}
    alive = set(V)
    k = 0
    while alive:
        v = min(alive, key=lambda x: (deg[x], x))
        k = max(k, deg[v])
        alive.discard(v)
        for u in adj[v]:
            if u in alive:
                deg[u] -= 1
    return k


@dataclass
class LLLResult:
    parts: list[list[int]]
    attempts: int
    cross_edge_ok: bool
    stats: dict = field(default_factory=dict)


def lll_select(parts: Sequence[Iterable[int]], edges: Iterable[tuple[int, int]], d: int, target: int | None = None,
               retries: int = 50, seed: int = 0) -> LLLResult:
    """Keep each vertex with probability 1/d, then drop every kept vertex that
    has a kept in-neighbour under a degeneracy orientation; retry until every
    part keeps at least ``target`` vertices."""
    parts = [sorted(set(p)) for p in parts]
    owner: dict[int, int] = {}
    for i, p in enumerate(parts):
        for v in p:
            if v in owner:
                raise ValueError(f"vertex {v} lies in two parts")
            owner[v] = i
    edges = sorted({norm_edge(u, v) for u, v in edges})
    for u, v in edges:
        if u not in owner or v not in owner:
            raise ValueError(f"edge {(u, v)} leaves the union of the parts")
    if d < 1:
        raise ValueError("d must be >= 1")
    a = min((len(p) for p in parts), default=0)
    if target is None:
        target = math.ceil(a / (100 * d))
    arcs = degeneracy_orient(owner, edges, d)
    in_nbrs: dict[int, list[int]] = {v: [] for v in owner}
    for t, h in arcs:
        in_nbrs[h].append(t)
    cross: dict[tuple[int, int], int] = {}
    for u, v in edges:
        i, j = sorted((owner[u], owner[v]))
        if i != j:
            cross[(i, j)] = cross.get((i, j), 0) + 1
    cross_ok = all(c <= 1 for c in cross.values())
    order = sorted(owner)
    rng = stream(seed, "lll")
    p = 1.0 / d
    deficits = []
    for attempt in range(1, retries + 1):
        S = {v for v in order if rng.random() < p}
        keep = {v for v in S if not any(t in S for t in in_nbrs[v])}
        out = [[v for v in part if v in keep] for part in parts]
        for u, v in edges:
            assert not (u in keep and v in keep), "selection is not stable"
        short = [max(0, target - len(o)) for o in out]
        if not any(short):
            return LLLResult(out, attempt, cross_ok, {"target": target, "sizes": [len(o) for o in out]})
        deficits.append(sum(short))
    raise LLLExhausted(
        f"no selection met target {target} in {retries} attempts",
        {"target": target, "retries": retries, "mean_deficit": sum(deficits) / max(1, len(deficits)),
         "max_deficit": max(deficits, default=0), "cross_edge_ok": cross_ok},
    )
