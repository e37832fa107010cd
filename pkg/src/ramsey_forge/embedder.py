"""Embedding a subdivision H^{sigma'} into the expander G' as a good subgraph.

State is the triple (J, K, F): J is what has been embedded, K adds reserve
trees hanging off vertices that may still need to branch, and F collects
vertices that must never be used (closure of K and critical vertices outside
K). Edges of H are embedded one at a time:

1. grow a short path plus a small tree from the image of each endpoint,
2. join the two frontiers by a path that avoids the closure of K,
3. keep only the resulting path, prune reserves that are no longer needed.

Every phase works on a copy of the state and commits only after checks pass.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .auxgraph import AuxGraph, is_good
from .hypercore import Edge, Graph, norm_edge
from .matching_lll import BipartiteHypergraph, LLLExhausted, SearchBudgetExceeded, degeneracy, find_D_matching, lll_select
from .rng import derive_seed
from .task import SubdivisionTask, subdivided_path


class EmbedError(RuntimeError):
    kind = "embed"

    def __init__(self, msg: str, **info):
        super().__init__(msg)
        self.info = info

    def to_json(self) -> dict:
        return {"kind": self.kind, "message": str(self), **_jsonable(self.info)}


class Stuck(EmbedError):
    kind = "stuck"


class Disconnected(EmbedError):
    kind = "disconnected"


class WindowMiss(EmbedError):
    kind = "window_miss"


class ExtendError(EmbedError):
    kind = "extend"


class InvariantBreach(AssertionError):
    def __init__(self, name: str, msg: str, dump: dict | None = None):
        super().__init__(f"({name}) {msg}")
        self.name = name
        self.dump = dump or {}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    if isinstance(x, Fraction):
        return str(x)
    return x


@dataclass(frozen=True)
class EmbedParams:
    """Desk-scale knobs. ``None`` fields are derived from the others:

    d = 20 s d' (induced) or 10 s d' (plain); D' = 2D (induced) or D (plain);
    required available neighbours = d' + 1; core degree = required;
    tree size = max(1, ceil(alpha N / (50 s))).
    """

    D: int = 2
    d_prime: int = 2
    d: int | None = None
    D_prime: int | None = None
    required: int | None = None
    core_delta: int | None = None
    tree_size: int | None = None
    alpha: Fraction = Fraction(1, 100)
    retries: int = 3
    matching_budget: int = 200_000
    lll_retries: int = 50
    seed: int = 0
    audit: bool = True

    def resolved(self, s: int, mode: str, N: int) -> "EmbedParams":
        dp = self.d_prime
        d = self.d if self.d is not None else (20 if mode == "induced" else 10) * s * dp
        Dp = self.D_prime if self.D_prime is not None else (2 * self.D if mode == "induced" else self.D)
        req = self.required if self.required is not None else dp + 1
        core = self.core_delta if self.core_delta is not None else req
        ts = self.tree_size if self.tree_size is not None else max(1, math.ceil(Fraction(self.alpha) * N / (50 * s)))
        return EmbedParams(self.D, dp, d, Dp, req, core, ts, Fraction(self.alpha), self.retries, self.matching_budget,
                           self.lll_retries, self.seed, self.audit)

    def to_json(self) -> dict:
        return _jsonable(self.__dict__)


@dataclass
class CritResult:
    C: set[int]
    reserved: dict[int, list[Edge]]
    trace: list[list[int]]
    X0: int
    e_J: int
    hypothesis: bool
    bound_holds: bool


@dataclass
class EmbeddingState:
    aux: AuxGraph
    Gp: Graph
    Vp: frozenset
    Vpp: frozenset
    params: EmbedParams
    mode: str
    J: set = field(default_factory=set)
    K: set = field(default_factory=set)
    K_vertices: set = field(default_factory=set)
    parent: dict = field(default_factory=dict)
    F: set = field(default_factory=set)
    C: set = field(default_factory=set)
    reserved: dict = field(default_factory=dict)
    image_edges: set = field(default_factory=set)  # J at the last step boundary
    h_degree: Counter = field(default_factory=Counter)
    internal: set = field(default_factory=set)
    orig_map: dict = field(default_factory=dict)
    paths: dict = field(default_factory=dict)
    step_exempt: set = field(default_factory=set)
    phase: str = "boundary"
    aux_gp_edge: dict = field(default_factory=dict)  # hyperedge -> G' edge it induces
    stats: dict = field(default_factory=lambda: {"critical_calls": [], "audits": 0, "extensions": 0, "lll_calls": 0})
    _counter: int = 0

    def clone(self) -> "EmbeddingState":
        st = EmbeddingState(self.aux, self.Gp, self.Vp, self.Vpp, self.params, self.mode)
        st.J, st.K, st.K_vertices = set(self.J), set(self.K), set(self.K_vertices)
        st.parent, st.F, st.C = dict(self.parent), set(self.F), set(self.C)
        st.reserved = {k: list(v) for k, v in self.reserved.items()}
        st.image_edges, st.h_degree, st.internal = set(self.image_edges), Counter(self.h_degree), set(self.internal)
        st.orig_map, st.paths, st.step_exempt = dict(self.orig_map), dict(self.paths), set(self.step_exempt)
        st.phase = self.phase
        st.aux_gp_edge = self.aux_gp_edge
        st.stats = self.stats  # shared: diagnostics survive rollbacks of failed attempts
        st._counter = self._counter
        return st

    def restore(self, other: "EmbeddingState") -> None:
        for name in ("J", "K", "K_vertices", "parent", "F", "C", "reserved", "image_edges", "h_degree", "internal",
                     "orig_map", "paths", "step_exempt", "phase", "_counter"):
            setattr(self, name, getattr(other, name))

    # -- helpers on the fixed context
    def hyperedge(self, u: int, v: int) -> int:
        return self.aux.hyperedge_of(u, v)

    def nbrs(self, v: int) -> tuple[int, ...]:
        return self.Gp.neighbors(v)

    def next_seed(self, tag: str) -> int:
        self._counter += 1
        return derive_seed(self.params.seed, tag, self._counter)


def new_state(aux: AuxGraph, Gp: Graph, Vp: Iterable[int], Vpp: Iterable[int], params: EmbedParams, mode: str) -> EmbeddingState:
    p = params.resolved(aux.s, mode, aux.hypergraph.n_vertices)
    return EmbeddingState(aux, Gp, frozenset(Vp), frozenset(Vpp), p, mode)


# ------------------------------------------------------------ closures and availability


def _cl1(st: EmbeddingState, edges: Iterable[Edge]) -> set[int]:
    H = st.aux.hypergraph
    out: set[int] = set()
    for u, v in edges:
        out.update(H.edges[st.hyperedge(u, v)])
    return out


def _touching(st: EmbeddingState, cl: set[int]) -> set[int]:
    inc = st.aux.hypergraph.incidence
    T: set[int] = set()
    for w in cl:
        T.update(inc[w])
    return T


class _Avail:
    """Availability oracle for a fixed reference graph J.

    u is available for v when R = h(uv) - {v} misses cl(J); in induced mode
    additionally no hyperedge other than h(uv) meets both R and cl(J). The
    hyperedge h(uv) itself is excluded from that second test: it always
    contains v, so when v lies in cl(J) a literal depth-2 closure would rule
    out every neighbour of v.
    """

    def __init__(self, st: EmbeddingState, J: Iterable[Edge], extra: Iterable[int] = ()):
        self.st = st
        self.cl = _cl1(st, J) | set(extra)
        self.T = _touching(st, self.cl) if st.mode == "induced" else set()

    def rest_ok(self, f: int, rest: Iterable[int]) -> bool:
        rest = list(rest)
        if any(w in self.cl for w in rest):
            return False
        if self.st.mode == "induced":
            inc = self.st.aux.hypergraph.incidence
            for w in rest:
                for g in inc[w]:
                    if g != f and g in self.T:
                        return False
        return True

    def ok(self, v: int, u: int) -> bool:
        f = self.st.hyperedge(u, v)
        return self.rest_ok(f, (w for w in self.st.aux.hypergraph.edges[f] if w != v))


def available_neighbors(st: EmbeddingState, J_ref: Iterable[Edge], v: int) -> list[int]:
    av = _Avail(st, J_ref)
    return [u for u in st.nbrs(v) if av.ok(v, u)]


# ------------------------------------------------------------ critical sets


def critical_set(st: EmbeddingState, J_ref: Iterable[Edge], prefer: Iterable[Edge] = ()) -> CritResult:
    """Iterated critical set: non-leaves of J, then repeatedly every fresh
    vertex with at least d unavailable neighbours, each of which reserves d'
    incident edges (preferring edges in ``prefer``, then available ones)."""
    p = st.params
    J0 = {norm_edge(*e) for e in J_ref}
    prefer = {norm_edge(*e) for e in prefer}
    deg: Counter = Counter()
    for u, v in J0:
        deg[u] += 1
        deg[v] += 1
    X0 = sorted(v for v, k in deg.items() if k >= 2)
    C = set(X0)
    trace = [X0]
    reserved: dict[int, list[Edge]] = {}
    cur = set(J0)
    H = st.aux.hypergraph
    while True:
        av = _Avail(st, cur)
        cl2 = set(av.cl)
        for g in (av.T if st.mode == "induced" else _touching(st, av.cl)):
            cl2.update(H.edges[g])
        cand: set[int] = set()
        inc = H.incidence
        for w in cl2:
            for g in inc[w]:
                e = st.aux_gp_edge.get(g)
                if e is not None:
                    cand.update(e)
        new = []
        for v in sorted(cand - C):
            if v not in st.Vp:
                continue
            bad = sum(1 for u in st.nbrs(v) if not av.ok(v, u))
            if bad >= p.d:
                new.append(v)
        if not new:
            break
        for v in new:
            inc_edges = sorted(st.nbrs(v), key=lambda u: (norm_edge(v, u) not in prefer, not av.ok(v, u), u))
            picks = [norm_edge(v, u) for u in inc_edges[: p.d_prime]]
            reserved[v] = picks
            cur.update(picks)
        C.update(new)
        trace.append(new)
    N = H.n_vertices
    s = H.s
    eJ = len(J0)
    if st.mode == "induced":
        hyp = eJ <= Fraction(p.alpha) * N / (22 * s) - p.d_prime
        # the strict form is vacuous at e(J) = 0, where no vertex may join X0
        holds = len(C) < len(X0) + Fraction(eJ, p.d_prime) if eJ else len(C) == len(X0)
    else:
        hyp = eJ <= Fraction(p.alpha) * N / (2 * s) - Fraction(p.d_prime, 2)
        holds = len(C) <= len(X0) + Fraction(eJ, p.d_prime)
    st.stats["critical_calls"].append({"e_J": eJ, "X0": len(X0), "C": len(C), "hypothesis": bool(hyp), "holds": bool(holds)})
    return CritResult(C, reserved, trace, len(X0), eJ, bool(hyp), bool(holds))


def _refresh_critical(st: EmbeddingState) -> None:
    res = critical_set(st, st.K, prefer=st.K)
    st.C = res.C
    st.reserved = res.reserved
    st.F |= (_cl1(st, st.K) | st.C) - st.K_vertices


# ------------------------------------------------------------ extension


def _children(st: EmbeddingState, v: int) -> list[int]:
    return sorted(u for u, p in st.parent.items() if p == v)


def extend_good(st: EmbeddingState, C_new: Iterable[int]) -> list[int]:
    """Hang rooted trees off the vertices of C_new lying in K so that every
    non-leaf of the new trees is in C_new with exactly D children and no leaf
    is. Returns the roots that received trees. Raises ExtendError and leaves
    the state untouched on failure."""
    p = st.params
    C_new = set(C_new)
    roots = sorted(C_new & st.K_vertices)
    if not roots:
        return []
    av = _Avail(st, st.K)
    H = st.aux.hypergraph
    pool: dict[int, list[int]] = {}
    for x in sorted(C_new):
        if x not in st.Vp:
            continue
        pool[x] = [u for u in st.nbrs(x) if u not in st.F and u not in st.K_vertices and av.ok(x, u)]
    for x in roots:
        if len(pool.get(x, [])) < p.required:
            raise ExtendError("critical vertex lacks available neighbours", vertex=x,
                              available=len(pool.get(x, [])), required=p.required)
    mult = p.D_prime if st.mode == "induced" else p.D
    matched = sorted(x for x in pool if len(pool[x]) >= mult)
    if any(x not in matched for x in roots):
        raise ExtendError("root has fewer candidates than the matching multiplicity", roots=roots)
    # children drawn only from matched critical vertices or non-critical ones
    for x in matched:
        pool[x] = [u for u in pool[x] if u not in C_new or u in matched]
    X = tuple(("x", x) for x in matched)
    entries: list[tuple[int, int]] = []
    hedges = []
    for x in matched:
        for u in pool[x]:
            f = st.hyperedge(x, u)
            entries.append((x, u))
            hedges.append(frozenset({("x", x)} | {w for w in H.edges[f] if w != x}))
    Y = tuple(sorted(set().union(*hedges) - set(X), key=repr)) if hedges else ()
    B = BipartiteHypergraph(X, Y, tuple(hedges))
    try:
        M = find_D_matching(B, mult, budget=p.matching_budget)
    except SearchBudgetExceeded as exc:
        raise ExtendError("matching search inconclusive", **exc.stats) from None
    if M is None:
        raise ExtendError("no D'-matching saturating the critical copies", critical=len(matched), multiplicity=mult)
    chosen = [entries[i] for i in M.selected]
    A: dict[int, list[int]] = {x: [] for x in matched}
    for x, u in chosen:
        A[x].append(u)
    if st.mode == "induced":
        inc = H.incidence
        touch = {}
        for x, u in chosen:
            f = st.hyperedge(x, u)
            t = set()
            for w in H.edges[f]:
                if w != x:
                    t.update(g for g in inc[w] if g != f)
            touch[(x, u)] = (f, t)
        node = {e: i for i, e in enumerate(chosen)}
        L_edges = []
        for i, e1 in enumerate(chosen):
            f1, t1 = touch[e1]
            for e2 in chosen[i + 1:]:
                f2, t2 = touch[e2]
                if (t1 & t2) - {f1, f2}:
                    L_edges.append((node[e1], node[e2]))
        parts = [[node[(x, u)] for u in A[x]] for x in matched]
        dL = max(1, degeneracy(range(len(chosen)), L_edges))
        st.stats["lll_calls"] += 1
        try:
            res = lll_select(parts, L_edges, dL, target=p.D, retries=p.lll_retries, seed=st.next_seed("lll"))
        except LLLExhausted as exc:
            raise ExtendError("stable selection exhausted", **exc.stats) from None
        for x, part in zip(matched, res.parts):
            A[x] = [chosen[i][1] for i in part]
    new_K = set(st.K)
    new_parent = dict(st.parent)
    new_vertices = set(st.K_vertices)
    queue = deque(roots)
    done: set[int] = set()
    while queue:
        x = queue.popleft()
        if x in done:
            continue
        done.add(x)
        kids = [u for u in A.get(x, []) if u not in new_vertices][: p.D]
        if len(kids) < p.D:
            raise ExtendError("selected set too small after collisions", vertex=x, have=len(kids), need=p.D)
        for u in kids:
            new_K.add(norm_edge(x, u))
            new_parent[u] = x
            new_vertices.add(u)
            if u in C_new:
                queue.append(u)
    verdict = is_good(st.aux, new_K, st.mode)
    if not verdict.ok:
        raise ExtendError("extended reserve graph is not good", witness=verdict.witness, notes=verdict.notes)
    added = new_vertices - st.K_vertices
    for u in added:
        ch = [w for w, q in new_parent.items() if q == u]
        if u in C_new and len(ch) != p.D:
            raise ExtendError("critical tree vertex without D children", vertex=u)
        if u not in C_new and ch:
            raise ExtendError("non-critical tree vertex has children", vertex=u)
    st.K, st.parent, st.K_vertices = new_K, new_parent, new_vertices
    st.stats["extensions"] += 1
    return roots


# ------------------------------------------------------------ phase 1


@dataclass
class TreeResult:
    root: int
    path: list[int]
    depth: dict[int, int]  # T' vertex -> depth below the path tip
    frontier: list[int]

    def dist_from_root(self, v: int) -> int:
        return len(self.path) - 1 + self.depth[v]

    def route(self, st: EmbeddingState, v: int) -> list[int]:
        """Vertices from the root down to v along parent pointers."""
        out = [v]
        while out[-1] != self.root:
            out.append(st.parent[out[-1]])
        return out[::-1]


def _add_leaf(st: EmbeddingState, v: int) -> int:
    """Attach one new tree child to v (which is in J or is a fresh root)."""
    if v in st.C:
        res = [u for u in _children(st, v) if norm_edge(v, u) not in st.J]
        if not res:
            raise Stuck("critical vertex has no reserve edge left", vertex=v)
        u = res[0]
        st.J.add(norm_edge(v, u))
        return u
    avail = [u for u in available_neighbors(st, st.K, v) if u not in st.F and u not in st.K_vertices]
    if len(avail) < st.params.required:
        raise Stuck("no available neighbour and no reserve", vertex=v, available=len(avail),
                    required=st.params.required)
    Jp = set(st.J) | {norm_edge(v, u) for u in avail[: st.params.d_prime]}
    Cp = critical_set(st, Jp, prefer=st.K).C
    C_hat = Cp - st.C
    C_hat.add(v)
    extend_good(st, C_hat)
    kids = [u for u in _children(st, v) if norm_edge(v, u) not in st.J]
    if not kids:
        raise Stuck("extension gave no child", vertex=v)
    u = kids[0]
    st.J.add(norm_edge(v, u))
    _refresh_critical(st)
    return u


def _child_count(st: EmbeddingState, v: int) -> int:
    return sum(1 for q in st.parent.values() if q == v)


def grow_tree(st: EmbeddingState, root: int, path_len: int, tree_size: int, n_target: int) -> TreeResult:
    """Path of ``path_len`` edges from ``root`` then a breadth-first tree of
    ``tree_size`` vertices with at most D children per vertex."""
    D = st.params.D
    if root not in st.K_vertices:
        st.K_vertices.add(root)
    path = [root]
    for _ in range(path_len):
        path.append(_add_leaf(st, path[-1]))
        _audit(st)
    tip = path[-1]
    depth = {tip: 0}
    order = [tip]
    queue = deque([tip])
    tree_kids = Counter()
    while len(order) < tree_size and queue:
        v = queue[0]
        cap = D - (st.h_degree[v] if v == root and path_len == 0 else 0)
        if tree_kids[v] >= cap:
            queue.popleft()
            continue
        u = _add_leaf(st, v)
        tree_kids[v] += 1
        depth[u] = depth[v] + 1
        order.append(u)
        queue.append(u)
        _audit(st)
    if len(order) < tree_size:
        raise Stuck("tree growth exhausted", root=root, size=len(order), wanted=tree_size)
    maxd = max(depth.values())
    nlev = max(1, math.ceil(math.log(tree_size, D)) - math.floor(math.log(max(n_target, 1), D))) if tree_size > 1 else 1
    frontier = sorted(v for v, dd in depth.items() if dd >= maxd - (nlev - 1))
    return TreeResult(root, path, depth, frontier)


# ------------------------------------------------------------ phase 2


@dataclass
class ConnectResult:
    path: list[int]  # x1 ... x2
    layers: list[tuple[int, int]]
    candidates: int


def _prune_unneeded_reserves(st: EmbeddingState, keep_critical: set[int]) -> None:
    for v in sorted(st.K_vertices - keep_critical):
        for u in _children(st, v):
            if norm_edge(v, u) not in st.J:
                _remove_subtree(st, v, u)


def _remove_subtree(st: EmbeddingState, v: int, u: int) -> None:
    stack = [(v, u)]
    while stack:
        a, b = stack.pop()
        st.K.discard(norm_edge(a, b))
        st.parent.pop(b, None)
        for w in _children(st, b):
            stack.append((b, w))
        if not any(b in e for e in st.K):
            st.K_vertices.discard(b)


def _closure_avoiding(st: EmbeddingState, edges: Iterable[Edge], depth: int, seeds: set[int]) -> set[int]:
    """Vertices of the depth-``depth`` closure of ``edges``, where the seed
    vertices never propagate the closure to further hyperedges."""
    H = st.aux.hypergraph
    hs = {st.hyperedge(u, v) for u, v in edges}
    verts = {w for f in hs for w in H.edges[f]} - seeds
    for _ in range(depth - 1):
        grow = {g for w in verts for g in H.incidence[w]} - hs
        hs |= grow
        verts |= {w for f in grow for w in H.edges[f]} - seeds
    return verts


def connect_trees(st: EmbeddingState, R1: Iterable[int], R2: Iterable[int], accept=None, max_len: int | None = None) -> ConnectResult:
    """Alternating breadth-first search from R1 and R2. A step x -> w is
    allowed when w is unused and h(xw), minus whichever endpoints are frontier
    seeds, avoids the closure of K (and, in induced mode, is not linked to it
    by a foreign hyperedge). Candidate meetings are checked directly: the
    union of K and the new path must be good, and ``accept(path)`` must hold."""
    R1, R2 = sorted(set(R1)), sorted(set(R2))
    if not R1 or not R2 or set(R1) & set(R2):
        raise ValueError("frontiers must be nonempty and disjoint")
    seeds = set(R1) | set(R2)
    av = _Avail(st, st.K)
    H = st.aux.hypergraph
    depth_cl = 3 if st.mode == "induced" else 2
    base = [e for e in st.K if e[0] not in seeds and e[1] not in seeds]
    blocked = st.K_vertices | st.F | _closure_avoiding(st, base, depth_cl, seeds)

    def step_ok(x: int, w: int) -> bool:
        # steps away from the seeds are covered by the avoided closure
        if x not in seeds and w not in seeds:
            return True
        f = st.hyperedge(x, w)
        return av.rest_ok(f, (z for z in H.edges[f] if z not in seeds or z not in (x, w)))

    par = [{v: None for v in R1}, {v: None for v in R2}]
    frontier = [list(R1), list(R2)]
    layers = [(len(R1), len(R2))]
    tried = 0
    rejects: Counter = Counter()

    def trace(side: int, v: int) -> list[int]:
        out = [v]
        while par[side][out[-1]] is not None:
            out.append(par[side][out[-1]])
        return out

    depth = 0
    while frontier[0] or frontier[1]:
        for side in (0, 1):
            nxt = []
            other = 1 - side
            for x in frontier[side]:
                for w in st.nbrs(x):
                    if w in par[side]:
                        continue
                    if not step_ok(x, w):
                        continue
                    if w in par[other]:
                        a, b = trace(side, x)[::-1], trace(other, w)
                        path = a + b if side == 0 else (a + b)[::-1]
                        tried += 1
                        edges = {norm_edge(p, q) for p, q in zip(path, path[1:])}
                        verdict = is_good(st.aux, st.K | edges, st.mode)
                        if not verdict.ok:
                            rejects["not_good"] += 1
                            continue
                        if accept is not None and not accept(path):
                            rejects["rejected"] += 1
                            continue
                        layers.append((len(par[0]), len(par[1])))
                        return ConnectResult(path, layers, tried)
                    if w in blocked or w in seeds:
                        continue
                    par[side][w] = x
                    nxt.append(w)
            frontier[side] = sorted(nxt)
        depth += 1
        layers.append((len(par[0]), len(par[1])))
        if max_len is not None and 2 * depth > max_len + 2:
            break
    raise Disconnected("frontiers exhausted without an acceptable meeting", layers=layers, candidates=tried,
                       rejects=dict(rejects))


# ------------------------------------------------------------ phase 3


def rollback(st: EmbeddingState, kept_path: Sequence[int]) -> None:
    """Shrink J to the image of H_{i+1}, drop reserves of vertices that stop
    being critical and any part of K detached from J, and recompute F."""
    new_edges = {norm_edge(a, b) for a, b in zip(kept_path, kept_path[1:])}
    if not new_edges <= st.J:
        raise ValueError("kept path must lie in J")
    J_new = st.image_edges | new_edges
    old = critical_set(st, st.J).C
    new = critical_set(st, J_new).C
    for v in sorted(old - new):
        for u in _children(st, v):
            if norm_edge(v, u) not in J_new:
                _remove_subtree(st, v, u)
    for u in kept_path:
        st.parent.pop(u, None)
    # drop components of K that do not meet J_new
    jv = {v for e in J_new for v in e}
    adj: dict[int, set[int]] = {}
    for a, b in st.K:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    keep: set[int] = set()
    dq = deque(sorted(jv))
    keep.update(jv)
    while dq:
        x = dq.popleft()
        for y in adj.get(x, ()):
            if y not in keep:
                keep.add(y)
                dq.append(y)
    st.K = {e for e in st.K if e[0] in keep and e[1] in keep}
    st.K_vertices = keep | set(st.orig_map.values())
    st.parent = {u: q for u, q in st.parent.items() if u in keep and q in keep}
    st.J = set(J_new)
    st.image_edges = set(J_new)
    st.internal |= set(kept_path[1:-1])
    st.h_degree[kept_path[0]] += 1
    st.h_degree[kept_path[-1]] += 1
    st.step_exempt = set()
    st.F = set()
    _refresh_critical(st)
    st.F |= (_cl1(st, st.K) | critical_set(st, st.J).C) - st.K_vertices
    st.phase = "boundary"


# ------------------------------------------------------------ invariants


def audit(st: EmbeddingState, boundary: bool = False, n_target: int | None = None) -> None:
    """Assert the state invariants. Between step boundaries, the reserve-count
    condition is only checked while trees are being grown, and vertices on the
    path already committed in this step are exempt."""
    st.stats["audits"] += 1
    mode = st.mode
    if not st.J <= st.K:
        raise InvariantBreach("A1", "J is not contained in K", {"extra": sorted(st.J - st.K)[:5]})
    for name, E in (("J", st.J), ("K", st.K)):
        v = is_good(st.aux, E, mode)
        if not v.ok:
            raise InvariantBreach("A1", f"{name} is not good: {v.notes}", {"witness": v.witness})
    for e in st.K:
        if e[0] not in st.Vp or e[1] not in st.Vp:
            raise InvariantBreach("A1", "K leaves G'", {"edge": e})
    jv = {x for e in st.J for x in e}
    anchors = jv | set(st.orig_map.values()) | st.step_exempt
    rest = st.K - st.J
    adj: dict[int, set[int]] = {}
    for a, b in rest:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    seen: set[int] = set()
    for v in sorted(adj):
        if v in seen:
            continue
        comp, dq = {v}, deque([v])
        while dq:
            x = dq.popleft()
            for y in adj[x]:
                if y not in comp:
                    comp.add(y)
                    dq.append(y)
        seen |= comp
        ne = sum(1 for a, b in rest if a in comp)
        if ne != len(comp) - 1:
            raise InvariantBreach("A1", "reserve part of K is not a forest", {"component": sorted(comp)[:10]})
        if len(comp & anchors) > 1:
            raise InvariantBreach("A1", "reserve tree touches J more than once", {"component": sorted(comp)[:10]})
    if boundary or st.phase == "grow":
        D = st.params.D
        kdeg: Counter = Counter()
        for a, b in st.K:
            kdeg[a] += 1
            kdeg[b] += 1
        for v, dg in kdeg.items():
            if dg < 2 or v in st.internal or v in st.step_exempt:
                continue
            need = D - st.h_degree[v]
            have = sum(1 for u, q in st.parent.items() if q == v and (not boundary or norm_edge(u, v) not in st.J))
            if have < need:
                raise InvariantBreach("A2", "non-leaf without enough children", {"vertex": v, "have": have, "need": need})
    cl = _cl1(st, st.K)
    if not cl - st.K_vertices <= st.F:
        raise InvariantBreach("A3", "closure of K escapes F", {"missing": sorted(cl - st.K_vertices - st.F)[:10]})
    if st.F & st.K_vertices:
        raise InvariantBreach("A3", "embedded vertex lies in F", {"vertices": sorted(st.F & st.K_vertices)[:10]})
    cK = critical_set(st, st.K, prefer=st.K).C
    if cK != st.C:
        raise InvariantBreach("A4", "stored critical set differs from recomputation",
                              {"stored_only": sorted(st.C - cK)[:10], "recomputed_only": sorted(cK - st.C)[:10]})
    cJ = critical_set(st, st.J, prefer=st.K).C
    if not cJ <= st.C:
        raise InvariantBreach("A4", "critical set of J not inside that of K", {"extra": sorted(cJ - st.C)[:10]})
    kdeg = Counter()
    for a, b in st.K:
        kdeg[a] += 1
        kdeg[b] += 1
    nonleaves = {v for v, dg in kdeg.items() if dg >= 2}
    if not nonleaves <= st.C:
        raise InvariantBreach("A4", "non-leaf of K is not critical", {"vertices": sorted(nonleaves - st.C)[:10]})
    if not st.C <= st.F | nonleaves:
        raise InvariantBreach("A4", "critical vertex neither forbidden nor a non-leaf",
                              {"vertices": sorted(st.C - st.F - nonleaves)[:10]})
    if boundary and n_target is not None:
        bound = st.params.D * (1 + Fraction(1, st.params.d_prime)) * n_target
        if len(st.K) > bound:
            raise InvariantBreach("A-size", "reserve graph exceeds D(1+1/d')n edges", {"e_K": len(st.K), "bound": str(bound)})


def _audit(st: EmbeddingState, boundary: bool = False, n_target: int | None = None) -> None:
    if st.params.audit:
        audit(st, boundary, n_target)


# ------------------------------------------------------------ driver


@dataclass
class Embedding:
    task: SubdivisionTask
    sigma_prime: tuple[int, ...]
    paths: tuple[tuple[int, ...], ...]  # per H edge, G' vertices from image(a) to image(b)
    branch: dict[int, int]
    trace: list

    def vertex_map(self) -> dict[int, int]:
        out: dict[int, int] = dict(self.branch)
        for i, path in enumerate(self.paths):
            for x, y in zip(subdivided_path(self.task.base, self.sigma_prime, i), path):
                out[x] = y
        return out

    def edges(self) -> set[Edge]:
        return {norm_edge(a, b) for p in self.paths for a, b in zip(p, p[1:])}

    def to_json(self) -> dict:
        return {
            "vertex_map": {str(k): v for k, v in sorted(self.vertex_map().items())},
            "sigma_prime": {str(i): x for i, x in enumerate(self.sigma_prime)},
            "paths": [list(p) for p in self.paths],
            "branch": {str(k): v for k, v in sorted(self.branch.items())},
            "trace": _jsonable(self.trace),
            "task": self.task.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Embedding":
        task = SubdivisionTask.from_json(d["task"])
        sp = tuple(d["sigma_prime"][str(i)] for i in range(len(d["sigma_prime"])))
        return cls(task, sp, tuple(tuple(p) for p in d["paths"]), {int(k): v for k, v in d["branch"].items()}, d.get("trace", []))


@dataclass
class EmbedFailure:
    edge: int
    attempts: list
    stats: dict

    def to_json(self) -> dict:
        return _jsonable({"edge": self.edge, "attempts": self.attempts, "stats": _summarize_stats(self.stats)})


def _summarize_stats(stats: dict) -> dict:
    calls = stats["critical_calls"]
    return {
        "critical_calls": len(calls),
        "critical_bound_checked": sum(1 for c in calls if c["hypothesis"]),
        "critical_bound_violations": sum(1 for c in calls if c["hypothesis"] and not c["holds"]),
        "audits": stats["audits"],
        "extensions": stats["extensions"],
        "lll_calls": stats["lll_calls"],
    }


def _adjust(path_len: int, tree_size: int, length: int, lo: int, hi: int, D: int) -> tuple[int, int]:
    """Move the stem length by half the window deficit (each stem counts twice)."""
    if length > hi:
        if path_len > 0:
            return max(0, path_len - -(-(length - hi) // 2)), tree_size
        return 0, max(1, tree_size // D)
    if length < lo:
        return path_len + -(-(lo - length) // 2), tree_size
    return path_len, tree_size


def _fresh_root(st: EmbeddingState, exclude: set[int]) -> int:
    # in induced mode a root next to the closure of K would let a foreign
    # hyperedge meet the closure twice as soon as the root gets an edge
    near = _closure_avoiding(st, st.K, 2, set()) if st.mode == "induced" else set()
    for v in sorted(st.Vpp):
        if v not in st.K_vertices and v not in st.F and v not in exclude and v not in near:
            return v
    raise Stuck("no fresh root left in the core", excluded=len(exclude))


def _embed_edge(st: EmbeddingState, task: SubdivisionTask, i: int, path_len: int, tree_size: int, exclude: set[int],
                n_target: int, info: dict) -> dict:
    a, b = task.base.edges[i]
    L1, L2 = st.aux.L1, st.aux.L2
    lo, hi = task.window(i, L1, L2)
    info.update({"path_len": path_len, "tree_size": tree_size, "window": [lo, hi]})
    st.phase = "grow"
    ra = st.orig_map.get(a)
    if ra is None:
        ra = _fresh_root(st, exclude)
        info["fresh_a"] = ra
    st.K_vertices.add(ra)
    T1 = grow_tree(st, ra, path_len, tree_size, n_target)
    rb = st.orig_map.get(b)
    if rb is None:
        rb = _fresh_root(st, exclude)
        info["fresh_b"] = rb
    st.K_vertices.add(rb)
    T2 = grow_tree(st, rb, path_len, tree_size, n_target)
    info["trees"] = [len(T1.depth), len(T2.depth)]
    info["frontiers"] = [len(T1.frontier), len(T2.frontier)]
    st.phase = "connect"
    R = set(T1.frontier) | set(T2.frontier)
    Jr = {e for e in st.J if e[0] not in R and e[1] not in R}
    keep = critical_set(st, Jr).C
    _prune_unneeded_reserves(st, keep)
    _refresh_critical(st)
    st.step_exempt = set(T1.frontier) | set(T2.frontier)
    _audit(st)

    def total(path: list[int]) -> int:
        return T1.dist_from_root(path[0]) + len(path) - 1 + T2.dist_from_root(path[-1])

    seen_lengths: list[int] = []

    def accept(p: list[int]) -> bool:
        seen_lengths.append(total(p))
        return lo <= seen_lengths[-1] <= hi

    base_len = min(T1.dist_from_root(v) for v in T1.frontier) + min(T2.dist_from_root(v) for v in T2.frontier)
    if base_len + 1 > hi:
        raise WindowMiss("stems alone exceed the window", length=base_len + 1, window=[lo, hi])
    try:
        conn = connect_trees(st, T1.frontier, T2.frontier, accept=accept, max_len=hi - base_len)
    except Disconnected as exc:
        if seen_lengths:
            exc.info["rejected_lengths"] = [min(seen_lengths), max(seen_lengths)]
        raise
    Pp = conn.path
    full = T1.route(st, Pp[0]) + Pp[1:-1] + T2.route(st, Pp[-1])[::-1]
    info["connect_layers"] = conn.layers
    info["sigma_prime"] = len(full) - 1
    if not lo <= len(full) - 1 <= hi:
        raise WindowMiss("realised length outside the window", length=len(full) - 1, window=[lo, hi])
    new_edges = [norm_edge(p, q) for p, q in zip(Pp, Pp[1:])]
    J_minus = set(st.J)
    st.J |= set(new_edges)
    st.K |= set(new_edges)
    st.K_vertices |= set(Pp)
    st.step_exempt = set(full)
    C_star = critical_set(st, st.J).C - set(Pp) - critical_set(st, J_minus).C
    extend_good(st, C_star)
    _refresh_critical(st)
    st.F |= critical_set(st, st.J).C - st.K_vertices
    _audit(st)
    st.phase = "rollback"
    rollback(st, full)
    st.orig_map[a] = full[0]
    st.orig_map[b] = full[-1]
    st.paths[i] = tuple(full)
    _audit(st, boundary=True, n_target=n_target)
    return info


def embed_subdivision(Gprime: Graph, Vprime: Iterable[int], Vcore: Iterable[int], A: AuxGraph, task: SubdivisionTask,
                      params: EmbedParams) -> tuple[Embedding | None, EmbeddingState, EmbedFailure | None]:
    """Embed H^{sigma'} edge by edge. Returns (embedding, final state, None)
    on success and (None, state, failure diagnostics) otherwise."""
    task.check_windows(A.L1, A.L2)
    if task.case == "even" and any(x % 2 for x in task.sigma):
        raise ValueError("even case needs even lengths")
    st = new_state(A, Gprime, Vprime, Vcore, params, task.mode)
    if st.params.D < task.D:
        raise ValueError("params.D below the maximum degree of H")
    n_target = task.n_subdivided
    st.aux_gp_edge = {A.hyperedge_of(u, v): (u, v) for u, v in Gprime.edges}
    _audit(st, boundary=True, n_target=n_target)
    trace = []
    L2 = A.L2
    for i in range(task.base.n_edges):
        base_len = task.sigma[i] // (2 * L2)
        path_len = base_len
        tree_size = st.params.tree_size
        exclude: set[int] = set()
        attempts = []
        done = False
        for attempt in range(st.params.retries + 1):
            snap = st.clone()
            info: dict = {}
            try:
                _embed_edge(st, task, i, path_len, tree_size, exclude, n_target, info)
                info["attempt"] = attempt
                attempts.append({"ok": True, **info})
                done = True
                break
            except EmbedError as exc:
                st.restore(snap)
                d = exc.to_json()
                d.update({k: v for k, v in info.items() if k not in d})
                attempts.append({"ok": False, **d})
                lo, hi = task.window(i, A.L1, A.L2)
                fresh = {info[k] for k in ("fresh_a", "fresh_b") if k in info}
                if isinstance(exc, Disconnected) and "rejected_lengths" in exc.info:
                    # meetings existed but fell outside the window: move the stems by the deficit
                    short, long_ = exc.info["rejected_lengths"]
                    if lo <= short or long_ <= hi:
                        exclude |= fresh
                    path_len, tree_size = _adjust(path_len, tree_size, short if short > hi else long_, lo, hi,
                                                  st.params.D)
                elif isinstance(exc, WindowMiss):
                    path_len, tree_size = _adjust(path_len, tree_size, exc.info.get("length", lo), lo, hi,
                                                  st.params.D)
                else:
                    exclude |= fresh
        trace.append({"edge": i, "attempts": attempts})
        if not done:
            return None, st, EmbedFailure(i, attempts, st.stats)
    # isolated vertices of H
    branch = dict(st.orig_map)
    for v in range(task.base.n_vertices):
        if v not in branch:
            r = _fresh_root(st, set())
            st.K_vertices.add(r)
            branch[v] = r
    sigma_prime = tuple(len(st.paths[i]) - 1 for i in range(task.base.n_edges))
    emb = Embedding(task, sigma_prime, tuple(st.paths[i] for i in range(task.base.n_edges)), branch, trace)
    verdict = is_good(A, emb.edges(), task.mode)
    if not verdict.ok:
        raise InvariantBreach("final", f"embedded graph not good: {verdict.notes}", {"witness": verdict.witness})
    colors = {A.graph.color_of(u, v) for u, v in emb.edges()}
    if len(colors) > 1:
        raise InvariantBreach("final", "embedded graph is not monochromatic", {"colors": sorted(colors)})
    vm = emb.vertex_map()
    if len(set(vm.values())) != len(vm):
        raise InvariantBreach("final", "vertex map is not injective")
    return emb, st, None

