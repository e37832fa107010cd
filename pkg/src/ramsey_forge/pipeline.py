"""generate -> substitute -> colour -> extract -> embed -> lift -> verify."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import auxgraph
from .auxgraph import AuxGraph, ExpanderHypothesisError, GadgetFailure, extract_aux, mono_max_subgraph
from .embedder import EmbedParams, InvariantBreach, embed_subdivision
from .gadgets import Gadget, HostGraph, adversarial_coloring, make_gadget, substitute, uniform_coloring
from .generator import GenParams, generate_verified
from .hypercore import Graph, Hypergraph, check_edge_sparsity_Q2
from .oracle import verify_subdivision_embedding
from .rng import derive_seed, stream
from .task import SubdivisionTask


@dataclass
class ExperimentConfig:
    gen: GenParams
    k: int
    task: SubdivisionTask
    gadget_order: int | None = None
    trials: int = 1
    seed: int = 0
    coloring: str = "uniform"  # uniform | adversarial | file
    coloring_file: list | None = None
    embed: EmbedParams = field(default_factory=EmbedParams)
    audit_trials: int = 50

    @property
    def mode(self) -> str:
        return self.task.mode

    @property
    def case(self) -> str:
        return self.task.case

    def to_json(self) -> dict:
        g = self.gen
        return {
            "gen": {"N": g.N, "s": g.s, "c": str(g.c), "g": g.g, "alpha": str(g.alpha), "degree_cap": g.degree_cap,
                    "mode": g.mode, "case": g.case, "scale": str(g.scale), "seed": g.seed},
            "k": self.k, "task": self.task.to_json(), "gadget_order": self.gadget_order, "trials": self.trials,
            "seed": self.seed, "coloring": self.coloring, "embed": self.embed.to_json(),
            "audit_trials": self.audit_trials,
        }


def graph_stats(G: Graph, alpha: Fraction, seed: int, samples: int = 200) -> dict:
    """(Q1) counts and a sampled (Q2) audit over connected vertex sets."""
    N = G.n_vertices
    cap = max(1, int(alpha * N))
    rng = stream(seed, "q2")
    live = sorted(G.non_isolated())
    bad = 0
    checked = 0
    for _ in range(samples if live else 0):
        start = rng.choice(live)
        size = rng.randint(2, max(2, min(cap, 12)))
        A = {start}
        frontier = list(G.neighbors(start))
        while frontier and len(A) < size:
            w = frontier.pop(rng.randrange(len(frontier)))
            if w not in A:
                A.add(w)
                frontier.extend(u for u in G.neighbors(w) if u not in A)
        checked += 1
        if not check_edge_sparsity_Q2(G, A):
            bad += 1
    return {"n": N, "e": G.n_edges, "max_degree": G.max_degree(), "non_isolated": len(live),
            "q2_checked": checked, "q2_violations": bad}


def make_coloring(cfg: ExperimentConfig, host: HostGraph, trial_seed: int) -> tuple[int, ...]:
    if cfg.coloring == "uniform":
        return uniform_coloring(host, cfg.k, trial_seed)
    if cfg.coloring == "adversarial":
        return adversarial_coloring(host, cfg.k, trial_seed)
    if cfg.coloring == "file":
        col = tuple(int(c) for c in cfg.coloring_file)
        if len(col) != host.graph.n_edges:
            raise ValueError(f"colouring file has {len(col)} entries, host has {host.graph.n_edges} edges")
        if any(c < 0 or c >= cfg.k for c in col):
            raise ValueError("colouring file uses colours outside 0..k-1")
        return col
    raise ValueError(f"unknown colouring strategy {cfg.coloring!r}")


def build_gadget(cfg: ExperimentConfig) -> Gadget:
    return make_gadget(cfg.k, cfg.mode, cfg.case, override_order=cfg.gadget_order)


def expander_stage(A: AuxGraph, G_red: Graph, cfg: ExperimentConfig) -> tuple[Graph, dict]:
    """Expander extraction with the pipeline's c1 = c/(2k), c2 = 5/4. A failed
    hypothesis falls back to the largest component of G_red."""
    c1 = Fraction(cfg.gen.c) / (2 * cfg.k)
    c2 = Fraction(5, 4)
    delta = max(1, G_red.max_degree())
    live = sorted(G_red.non_isolated())
    try:
        Gp, cert = auxgraph.extract_expander(G_red, c1, c2, cfg.gen.alpha, delta, vertices=live or None)
        return Gp, {"fallback": None, **cert.to_json()}
    except ExpanderHypothesisError as exc:
        Gp, comp = auxgraph.largest_component(G_red)
        return Gp, {"fallback": "largest_component", "reason": str(exc), "vertices": len(comp),
                    "edges": Gp.n_edges, "c1": str(c1), "c2": str(c2)}


def run_trial(cfg: ExperimentConfig, H: Hypergraph, F: Gadget, trial: int) -> dict:
    tseed = derive_seed(cfg.seed, "trial", trial)
    rep: dict = {"trial": trial, "seed": tseed}
    host = substitute(H, F, seed=derive_seed(tseed, "substitute"))
    coloring = make_coloring(cfg, host, derive_seed(tseed, "coloring"))
    rep["host"] = {"n": host.graph.n_vertices, "e": host.graph.n_edges}
    try:
        A = extract_aux(host, coloring, cfg.mode, cfg.case)
    except GadgetFailure as exc:
        rep.update(status="failed", failure={"kind": "gadget", "hyperedges": exc.hyperedges[:20],
                                              "count": len(exc.hyperedges)})
        return rep
    rep["gadget_ok"] = A.graph.n_edges
    rep["gadget_copies"] = H.n_edges
    rep["ell"] = A.ell
    rep["G"] = graph_stats(A.graph, cfg.gen.alpha, tseed)
    if A.graph.n_edges == 0:
        rep.update(status="failed", failure={"kind": "empty_aux"})
        return rep
    G_red, color = mono_max_subgraph(A)
    rep["G_red"] = {"color": color, "e": G_red.n_edges, "max_degree": G_red.max_degree()}
    Gp, cert = expander_stage(A, G_red, cfg)
    rep["expander"] = cert
    params = cfg.embed.resolved(H.s, cfg.mode, H.n_vertices)
    Gpp, core = auxgraph.min_degree_core(Gp, params.core_delta)
    rep["core"] = {"delta": params.core_delta, "vertices": len(core)}
    Vp = sorted(Gp.non_isolated())
    if not core:
        rep.update(status="failed", failure={"kind": "empty_core", "expander_vertices": len(Vp)})
        return rep
    try:
        emb, st, fail = embed_subdivision(Gp, Vp, core, A, cfg.task, cfg.embed)
    except InvariantBreach as exc:
        rep.update(status="invariant_breach", failure={"kind": "invariant", "name": exc.name, "message": str(exc),
                                                        "dump": exc.dump})
        return rep
    rep["critical"] = _crit_summary(st.stats)
    if emb is None:
        rep.update(status="failed", failure={"kind": "embed", **fail.to_json()})
        return rep
    rep["embedding"] = emb.to_json()
    try:
        mapping, verdict = auxgraph.lift_embedding(A, host, coloring, emb.paths, cfg.task, emb.branch)
    except AssertionError as exc:
        rep.update(status="unsound", failure={"kind": "lift", "message": str(exc)})
        return rep
    independent = verify_subdivision_embedding(host, coloring, mapping, cfg.task)
    rep["verdict"] = independent.to_json()
    rep["status"] = "verified" if independent.ok else "unsound"
    return rep


def _crit_summary(stats: dict) -> dict:
    calls = stats["critical_calls"]
    return {"calls": len(calls), "hypothesis_checked": sum(1 for c in calls if c["hypothesis"]),
            "violations": sum(1 for c in calls if c["hypothesis"] and not c["holds"]),
            "audits": stats["audits"], "extensions": stats["extensions"]}


def run_endtoend(cfg: ExperimentConfig, H: Hypergraph | None = None, gen_report: dict | None = None) -> dict:
    if H is None:
        H, report = generate_verified(cfg.gen, audit_trials=cfg.audit_trials)
        gen_report = report.to_json()
    F = build_gadget(cfg)
    if F.s != H.s:
        raise ValueError(f"gadget order {F.s} differs from the hypergraph uniformity {H.s}")
    trials = [run_trial(cfg, H, F, t) for t in range(cfg.trials)]
    trials.sort(key=lambda r: r["trial"])
    statuses = [r["status"] for r in trials]
    produced = [r for r in trials if "embedding" in r]
    return {
        "config": cfg.to_json(),
        "generator": gen_report,
        "gadget": F.to_json(),
        "trials": trials,
        "summary": {
            "trials": len(trials),
            "produced": len(produced),
            "verified": statuses.count("verified"),
            "unsound": statuses.count("unsound"),
            "invariant_breaches": statuses.count("invariant_breach"),
            "success_rate": len(produced) / len(trials) if trials else 0.0,
            "failures": _failure_counts(trials),
            "critical_violations": sum(r.get("critical", {}).get("violations", 0) for r in trials),
        },
    }


def _failure_counts(trials: list[dict]) -> dict:
    out: dict = {}
    for r in trials:
        if "failure" in r:
            f = r["failure"]
            key = f.get("kind", "?")
            if key == "embed":
                kinds = [a.get("kind") for a in f.get("attempts", []) if not a.get("ok")]
                key = "embed:" + (kinds[-1] if kinds else "?")
            out[key] = out.get(key, 0) + 1
    return dict(sorted(out.items()))
