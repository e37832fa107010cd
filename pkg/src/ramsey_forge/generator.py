"""Random s-uniform hypergraphs with large girth and bounded degree.

Sample ``floor(c*N)`` independent uniform s-subsets, then prune: duplicates,
short Berge cycles, and every hyperedge touching an over-degree vertex. The
resulting hypergraph is audited for edge count and local sparsity; those
verdicts are data, since at desk scale they can legitimately fail.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from itertools import combinations

from .hypercore import (
    Hypergraph,
    _shortest_cycle_through,
    berge_girth,
    check_sparsity_P4,
    check_sparsity_P4prime,
)
from .rng import derive_seed

# Largest |A| checked exhaustively by the sparsity audit, and the cap on the
# number of subsets enumerated per size level.
EXHAUSTIVE_LIMIT = 3
EXHAUSTIVE_BUDGET = 100_000

# Desk feasibility bounds used by ``preset``.
MAX_DESK_N = 200_000
MAX_DESK_G = 40


@dataclass(frozen=True)
class GenParams:
    N: int
    s: int
    c: Fraction
    g: int
    alpha: Fraction
    degree_cap: int
    mode: str = "plain"
    case: str = "even"
    scale: Fraction = Fraction(1)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "scale", Fraction(self.scale))
        if self.s < 3 or self.N < self.s:
            raise ValueError(f"need N >= s >= 3, got N={self.N}, s={self.s}")
        if self.g < 3:
            raise ValueError(f"girth threshold must be >= 3, got {self.g}")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if not 0 < self.alpha < 1 or self.alpha * self.N <= 0:
            raise ValueError(f"alpha must lie in (0,1), got {self.alpha}")
        if self.degree_cap < 1:
            raise ValueError("degree_cap must be >= 1")
        if self.mode not in ("induced", "plain"):
            raise ValueError(f"mode must be induced|plain, got {self.mode!r}")
        if self.case not in ("even", "general"):
            raise ValueError(f"case must be even|general, got {self.case!r}")

    @property
    def m(self) -> int:
        return math.floor(self.c * self.N)

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("c", "alpha", "scale"):
            d[k] = str(d[k])
        return d

    @classmethod
    def from_json(cls, d: dict) -> "GenParams":
        d = dict(d)
        for k in ("c", "alpha", "scale"):
            if k in d:
                d[k] = Fraction(d[k])
        return cls(**d)


@dataclass
class GenReport:
    edges_sampled: int = 0
    duplicates_removed: int = 0
    girth_removed: int = 0
    degree_removed: int = 0
    final_edge_count: int = 0
    max_degree: int = 0
    girth_check: bool = True
    degree_check: bool = True
    P1_check: bool | None = None
    P1_window: tuple[str, str] | None = None
    sparsity_kind: str | None = None
    sparsity_check: bool | None = None
    sparsity_witness: list[int] | None = None
    sparsity_audit: dict | None = None
    attempts: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def sample_raw(params: GenParams, seed: int | None = None) -> Hypergraph:
    """``floor(c*N)`` independent uniform s-subsets of [N]."""
    if params.s > params.N:
        raise ValueError("s > N")
    rng = random.Random(derive_seed(params.seed if seed is None else seed, "sample_raw"))
    population = range(params.N)
    edges = tuple(tuple(sorted(rng.sample(population, params.s))) for _ in range(params.m))
    return Hypergraph(params.N, params.s, edges)


def _remove_short_cycles(H: Hypergraph, alive: list[bool], g: int) -> int:
    """Delete hyperedges until no Berge cycle of length <= g remains.

    Shortest cycles go first; within a length the smallest-index hyperedge of
    the cycle is removed. Scanning hyperedges in index order realises that rule:
    the first hyperedge lying on a current cycle of length L is itself the
    smallest index on that cycle, and deletions never create cycles.
    """
    removed = 0
    # length 2: two hyperedges sharing a pair
    owner: dict[tuple[int, int], list[int]] = {}
    for i, e in enumerate(H.edges):
        if alive[i]:
            for p in combinations(e, 2):
                owner.setdefault(p, []).append(i)
    for i, e in enumerate(H.edges):
        if not alive[i]:
            continue
        if any(len([j for j in owner[p] if alive[j]]) > 1 for p in combinations(e, 2)):
            alive[i] = False
            removed += 1
    candidates = [i for i in range(H.n_edges) if alive[i]]
    for L in range(3, g + 1):
        still = []
        for i in candidates:
            if not alive[i]:
                continue
            length, _ = _shortest_cycle_through(H, i, L, alive=alive)
            if length is not None:
                # all shorter cycles are gone, so this one has length exactly L
                alive[i] = False
                removed += 1
            else:
                still.append(i)
        candidates = still
    return removed


def prune(H: Hypergraph, g: int, degree_cap: int) -> tuple[Hypergraph, GenReport]:
    report = GenReport(edges_sampled=H.n_edges)
    alive = [True] * H.n_edges
    seen: set[tuple[int, ...]] = set()
    for i, e in enumerate(H.edges):
        if e in seen:
            alive[i] = False
            report.duplicates_removed += 1
        seen.add(e)
    report.girth_removed = _remove_short_cycles(H, alive, g)
    deg = [0] * H.n_vertices
    for i, e in enumerate(H.edges):
        if alive[i]:
            for v in e:
                deg[v] += 1
    heavy = {v for v in range(H.n_vertices) if deg[v] > degree_cap}
    for i, e in enumerate(H.edges):
        if alive[i] and any(v in heavy for v in e):
            alive[i] = False
            report.degree_removed += 1
    out = H.subhypergraph(i for i in range(H.n_edges) if alive[i])
    report.final_edge_count = out.n_edges
    report.max_degree = out.max_degree()
    girth, _ = berge_girth(out, g) if out.n_edges else (None, None)
    report.girth_check = girth is None
    report.degree_check = report.max_degree <= degree_cap
    return out, report


def _incidence_neighbors(H: Hypergraph) -> dict[int, set[int]]:
    nb: dict[int, set[int]] = {}
    for e in H.edges:
        for v in e:
            nb.setdefault(v, set()).update(e)
    for v in nb:
        nb[v].discard(v)
    return nb


def _connected_subsets(nb: dict[int, set[int]], k: int):
    """All vertex sets of size k connected in the 2-section, each yielded once."""
    for root in sorted(nb):
        seen: set[frozenset[int]] = set()
        stack = [frozenset([root])]
        while stack:
            A = stack.pop()
            if len(A) == k:
                yield A
                continue
            ext = set()
            for v in A:
                ext |= nb[v]
            for w in sorted(ext - A):
                if w <= root:
                    continue
                B = A | {w}
                if B not in seen:
                    seen.add(B)
                    stack.append(B)


def audit_sparsity(
    H: Hypergraph,
    alpha: Fraction | float,
    size_cap: int,
    trials: int,
    seed: int,
    kind: str = "P4",
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
    budget: int = EXHAUSTIVE_BUDGET,
) -> dict:
    """Search for a set A with |A| <= size_cap violating (P4) or (P4').

    Both sums split over the components of A in the 2-section of H, so a
    violating A has a violating connected piece; only connected sets are
    enumerated. Sizes up to ``exhaustive_limit`` are exhausted within
    ``budget`` sets per size; larger sizes get ``trials`` random connected sets.
    Finding nothing above the exhaustive limit is not a proof.
    """
    if size_cap > Fraction(alpha) * H.n_vertices:
        raise ValueError("size_cap exceeds alpha*N")
    check = check_sparsity_P4 if kind == "P4" else check_sparsity_P4prime
    out = {"kind": kind, "size_cap": size_cap, "exhaustive_limit": 0, "checked": 0,
           "exhaustive_complete": True, "witness": None}
    if H.n_edges == 0 or size_cap < 1:
        return out
    nb = _incidence_neighbors(H)
    limit = min(size_cap, exhaustive_limit)
    for k in range(2, limit + 1):
        count = 0
        for A in _connected_subsets(nb, k):
            count += 1
            if count > budget:
                out["exhaustive_complete"] = False
                break
            out["checked"] += 1
            if not check(H, A):
                out["witness"] = sorted(A)
                return out
        if not out["exhaustive_complete"]:
            break
        out["exhaustive_limit"] = k
    rng = random.Random(derive_seed(seed, "audit", kind))
    verts = sorted(nb)
    for k in range(limit + 1, size_cap + 1):
        for _ in range(trials):
            A = {rng.choice(verts)}
            ext = set(nb[next(iter(A))])
            while len(A) < k and ext:
                w = rng.choice(sorted(ext))
                A.add(w)
                ext |= nb[w]
                ext -= A
            out["checked"] += 1
            if not check(H, A):
                out["witness"] = sorted(A)
                return out
    return out


def generate_verified(params: GenParams, audit_trials: int = 50, audit_size_cap: int | None = None) -> tuple[Hypergraph, GenReport]:
    raw = sample_raw(params)
    H, report = prune(raw, params.g, params.degree_cap)
    lo, hi = params.c * params.N / 2, params.c * params.N
    report.P1_check = lo <= H.n_edges <= hi
    report.P1_window = (str(lo), str(hi))
    kind = "P4" if params.mode == "induced" else "P4prime"
    cap = audit_size_cap
    if cap is None:
        cap = max(1, min(8, math.floor(params.alpha * params.N)))
    cap = min(cap, math.floor(params.alpha * params.N))
    audit = audit_sparsity(H, params.alpha, cap, audit_trials, params.seed, kind="P4" if kind == "P4" else "P4prime")
    report.sparsity_kind = kind
    report.sparsity_check = audit["witness"] is None
    report.sparsity_witness = audit["witness"]
    report.sparsity_audit = audit
    if not (report.girth_check and report.degree_check):
        raise AssertionError("prune postcondition violated")
    return H, report


def generate_with_retry(params: GenParams, retries: int) -> tuple[Hypergraph, GenReport, int]:
    """Re-seed up to ``retries`` extra times until (P1) holds; returns the seed used."""
    attempts = []
    seed = params.seed
    for attempt in range(retries + 1):
        p = replace(params, seed=seed)
        H, rep = generate_verified(p)
        attempts.append({"seed": seed, "P1": rep.P1_check, "edges": rep.final_edge_count})
        if rep.P1_check or attempt == retries:
            rep.attempts = attempts
            return H, rep, seed
        seed = derive_seed(params.seed, "retry", attempt + 1)
    raise AssertionError("unreachable")


# ---------------------------------------------------------------- presets

PAPER_FORMULAS = {
    ("induced", "even"): {
        "c": "1e7 * k * s^4 * ln(s) * D",
        "alpha": "1e-4 * c^-5 * s^-15",
        "N": "ceil(1e13 * c^7 * s^22 * k * ln(s*D) * D * n)",
        "g": "ceil(1e10 * s * k * ln(s*D)^2)",
        "degree_cap": "8 * c * s",
    },
    ("induced", "general"): {
        "c": "1e7 * k * s^4 * ln(s) * D",
        "alpha": "1e-4 * c^-5 * s^-15",
        "N": "ceil(1e13 * c^7 * s^22 * k * ln(s*D) * D * n)",
        "g": "ceil(1e10 * s * k * ln(s*D)^2)",
        "degree_cap": "8 * c * s",
    },
    ("plain", "even"): {
        "c": "1e3 * k * s^2 * D",
        "alpha": "1e-3 * c^-2 * s^-4",
        "N": "ceil(1e13 * c^3 * s^9 * k * ln(k) * D * ln(s*D) * n)",
        "g": "ceil(1e10 * s * k * ln(k) * ln(s*D))",
        "degree_cap": "8 * c * s",
    },
    ("plain", "general"): {
        "c": "1e3 * (2*ceil(log2 k)+1) * k * s^2 * D",
        "alpha": "1e-3 * c^-2 * s^-4",
        "N": "ceil(1e13 * c^3 * s^9 * k * ln(k) * D * ln(s*D) * n)",
        "g": "ceil(1e10 * s * k * ln(k) * ln(s*D))",
        "degree_cap": "8 * c * s",
    },
}

# Named desk presets. These are chosen for feasibility at desk scale and are
# not values taken from the asymptotic analysis.
DESK_PRESETS = {
    "desk-small": {"s": 4, "k": 2, "D": 2, "c": Fraction(3), "g": 6, "alpha": Fraction(1, 100), "N": 2000},
}


def _paper_magnitudes(mode: str, case: str, k: int, D: int, s: int, n: int, scale: float) -> dict:
    """Evaluate the asymptotic parameter formulas with each leading power-of-ten
    constant divided (or, for alpha, multiplied) by ``scale``."""
    ln = math.log
    if mode == "induced":
        c = 1e7 / scale * k * s**4 * ln(s) * D
        alpha = min(0.5, 1e-4 * scale * c**-5 * s**-15)
        N = 1e13 / scale * c**7 * s**22 * k * ln(s * D) * D * n
        g = 1e10 / scale * s * k * ln(s * D) ** 2
    else:
        lk = max(ln(k), 1.0)
        mult = 1 if case == "even" else (2 * math.ceil(math.log2(k)) + 1)
        c = 1e3 / scale * mult * k * s**2 * D
        alpha = min(0.5, 1e-3 * scale * c**-2 * s**-4)
        N = 1e13 / scale * c**3 * s**9 * k * lk * D * ln(s * D) * n
        g = 1e10 / scale * s * k * lk * ln(s * D)
    return {"c": c, "alpha": alpha, "N": N, "g": g}


def preset(mode: str, case: str, scale, *, k: int = 2, D: int = 2, s: int | None = None, n: int = 13, seed: int = 0) -> tuple[GenParams, dict]:
    """Generator parameters plus a table recording each value next to its formula.

    ``scale`` is either the name of a desk preset or a positive number dividing
    the large constants of the asymptotic formulas. Numeric scales that leave
    magnitudes outside desk bounds are rejected with the offending values.
    """
    formulas = PAPER_FORMULAS[(mode, case)]
    if isinstance(scale, str):
        if scale not in DESK_PRESETS:
            raise ValueError(f"unknown preset {scale!r}; known: {sorted(DESK_PRESETS)}")
        base = DESK_PRESETS[scale]
        s_val = base["s"] if s is None else s
        c = base["c"]
        params = GenParams(
            N=base["N"], s=s_val, c=c, g=base["g"], alpha=base["alpha"],
            degree_cap=int(8 * c * s_val), mode=mode, case=case, scale=Fraction(1), seed=seed,
        )
        table = {
            "preset": scale,
            "values": {
                "N": params.N, "s": params.s, "c": str(params.c), "g": params.g,
                "alpha": str(params.alpha), "degree_cap": params.degree_cap,
                "k": base["k"], "D": base["D"],
            },
            "formulas": formulas,
            "note": "desk values; relations kept: degree_cap = 8*c*s",
        }
        return params, table
    scale = float(scale)
    if scale <= 0:
        raise ValueError("scale must be positive")
    s_val = 4 if s is None else s
    mags = _paper_magnitudes(mode, case, k, D, s_val, n, scale)
    c_val = max(1, math.floor(mags["c"]))
    N_val = mags["N"]
    g_val = mags["g"]
    table = {
        "preset": f"scale={scale:g}",
        "values": {"c": c_val, "alpha": mags["alpha"], "N": N_val, "g": g_val, "degree_cap": 8 * c_val * s_val,
                   "k": k, "D": D, "s": s_val, "n": n},
        "formulas": formulas,
    }
    if not (N_val <= MAX_DESK_N and math.ceil(g_val) <= MAX_DESK_G):
        raise ValueError(
            f"preset infeasible at desk scale (N={N_val:.3g} > {MAX_DESK_N} or g={g_val:.3g} > {MAX_DESK_G}); "
            f"magnitudes: {table['values']}"
        )
    N_int = max(s_val, math.ceil(N_val))
    alpha = Fraction(mags["alpha"]).limit_denominator(10**9)
    params = GenParams(
        N=N_int, s=s_val, c=Fraction(c_val), g=max(3, math.ceil(g_val)), alpha=alpha,
        degree_cap=8 * c_val * s_val, mode=mode, case=case, scale=Fraction(scale).limit_denominator(10**6), seed=seed,
    )
    return params, table
