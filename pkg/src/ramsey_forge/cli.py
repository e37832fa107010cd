"""Command-line runner. Every artifact is JSON; endtoend also writes a CSV summary."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import auxgraph
from .auxgraph import GadgetFailure, extract_aux, mono_max_subgraph
from .embedder import EmbedParams, Embedding, embed_subdivision
from .gadgets import HostGraph, adversarial_coloring, constant_coloring, make_gadget, substitute, uniform_coloring
from .generator import generate_verified, generate_with_retry, preset
from .hypercore import Hypergraph, load_json
from .oracle import verify_subdivision_embedding
from .pipeline import ExperimentConfig, expander_stage, run_endtoend
from .task import SubdivisionTask

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str | None, what: str) -> dict:
    if not path:
        raise UsageError(f"missing --{what}")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {path}")
    try:
        return load_json(p)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file is not valid JSON: {exc}") from None


def _gen_params(args):
    scale = args.scale if args.scale is not None else (args.preset or "desk-small")
    try:
        scale = float(scale)
    except ValueError:
        pass
    return preset(args.mode, args.case, scale, k=args.k, D=args.D, s=args.s, seed=args.seed)


def _parse_task(args) -> SubdivisionTask:
    if args.edges:
        edges = []
        for tok in args.edges.split(","):
            a, b = tok.split("-")
            edges.append((int(a), int(b)))
    else:
        edges = [(0, 1)]
    sig = [int(x) for x in str(args.sigma).split(",")]
    if len(sig) == 1:
        sig = sig * len(edges)
    if len(sig) != len(edges):
        raise UsageError("give one sigma value or one per edge")
    n = max(max(e) for e in edges) + 1
    return SubdivisionTask.from_json({"n": n, "edges": [list(e) for e in edges], "sigma": sig, "mode": args.mode,
                                      "case": args.case, "D": args.D})


def _embed_params(args) -> EmbedParams:
    p = EmbedParams(D=args.D, seed=args.seed)
    if getattr(args, "no_audit", False):
        p = replace(p, audit=False)
    return p


# ------------------------------------------------------------ subcommands


def cmd_preset(args) -> int:
    params, table = _gen_params(args)
    _emit(table, args.out)
    return EXIT_OK


def cmd_generate(args) -> int:
    params, table = _gen_params(args)
    if args.retry:
        H, rep, seed = generate_with_retry(params, args.retry)
    else:
        H, rep = generate_verified(params)
        seed = params.seed
    report = rep.to_json()
    report["seed_used"] = seed
    _emit({"hypergraph": H.to_json(), "report": report, "preset": table}, args.out)
    return EXIT_OK if rep.girth_check and rep.degree_check else EXIT_FAIL


def cmd_substitute(args) -> int:
    d = _load(args.hypergraph, "hypergraph")
    H = Hypergraph.from_json(d.get("hypergraph", d))
    F = make_gadget(args.k, args.mode, args.case, override_order=args.gadget_order)
    host = substitute(H, F, seed=args.seed)
    _emit(host.to_json(), args.out)
    return EXIT_OK


def cmd_color(args) -> int:
    host = HostGraph.from_json(_load(args.host, "host"))
    if args.strategy == "uniform":
        col = uniform_coloring(host, args.k, args.seed)
    elif args.strategy == "adversarial":
        col = adversarial_coloring(host, args.k, args.seed)
    else:
        col = constant_coloring(host, 0)
    _emit({"k": args.k, "strategy": args.strategy, "seed": args.seed, "coloring": list(col)}, args.out)
    return EXIT_OK


def _host_and_coloring(args):
    host = HostGraph.from_json(_load(args.host, "host"))
    col = tuple(_load(args.coloring, "coloring")["coloring"])
    if len(col) != host.graph.n_edges:
        raise UsageError("coloring length does not match the host")
    return host, col


def _cfg_for(args, task, host) -> ExperimentConfig:
    params, _ = _gen_params(args)
    params = replace(params, s=host.hypergraph.s)
    return ExperimentConfig(params, args.k, task, embed=_embed_params(args), seed=args.seed)


def cmd_extract(args) -> int:
    host, col = _host_and_coloring(args)
    try:
        A = extract_aux(host, col, args.mode, args.case)
    except GadgetFailure as exc:
        _emit({"status": "gadget_failure", "hyperedges": exc.hyperedges}, args.out)
        return EXIT_FAIL
    out = {"aux": A.to_json()}
    if A.graph.n_edges:
        G_red, color = mono_max_subgraph(A)
        cfg = _cfg_for(args, SubdivisionTask.single_edge(2 * max(2, A.L2), args.mode, args.case, args.D), host)
        Gp, cert = expander_stage(A, G_red, cfg)
        delta = cfg.embed.resolved(host.hypergraph.s, args.mode, host.hypergraph.n_vertices).core_delta
        _, core = auxgraph.min_degree_core(Gp, delta)
        out.update(red_color=color, red_edges=G_red.n_edges, expander=cert, core=list(core))
    _emit(out, args.out)
    return EXIT_OK


def cmd_embed(args) -> int:
    host, col = _host_and_coloring(args)
    task = _parse_task(args)
    A = extract_aux(host, col, args.mode, args.case)
    G_red, _ = mono_max_subgraph(A)
    cfg = _cfg_for(args, task, host)
    Gp, cert = expander_stage(A, G_red, cfg)
    delta = cfg.embed.resolved(host.hypergraph.s, args.mode, host.hypergraph.n_vertices).core_delta
    _, core = auxgraph.min_degree_core(Gp, delta)
    if not core:
        _emit({"status": "failed", "failure": {"kind": "empty_core"}, "expander": cert}, args.out)
        return EXIT_FAIL
    emb, st, fail = embed_subdivision(Gp, sorted(Gp.non_isolated()), core, A, task, cfg.embed)
    if emb is None:
        _emit({"status": "failed", "failure": fail.to_json()}, args.out)
        return EXIT_FAIL
    _emit({"status": "ok", "embedding": emb.to_json()}, args.out)
    return EXIT_OK


def _lift(host, col, emb: Embedding, mode: str, case: str) -> dict[int, int]:
    A = extract_aux(host, col, mode, case)
    mapping, _ = auxgraph.lift_embedding(A, host, col, emb.paths, emb.task, emb.branch)
    return mapping


def cmd_lift(args) -> int:
    host, col = _host_and_coloring(args)
    d = _load(args.embedding, "embedding")
    emb = Embedding.from_json(d.get("embedding", d))
    try:
        mapping = _lift(host, col, emb, emb.task.mode, emb.task.case)
    except AssertionError as exc:
        _emit({"status": "failed", "message": str(exc)}, args.out)
        return EXIT_FAIL
    _emit({"mapping": {str(k): v for k, v in sorted(mapping.items())}, "task": emb.task.to_json()}, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    host, col = _host_and_coloring(args)
    d = _load(args.embedding, "embedding")
    if "mapping" in d:
        task = SubdivisionTask.from_json(d["task"])
        mapping = {int(k): v for k, v in d["mapping"].items()}
    else:
        emb = Embedding.from_json(d.get("embedding", d))
        task = emb.task
        try:
            mapping = _lift(host, col, emb, task.mode, task.case)
        except AssertionError as exc:
            _emit({"ok": False, "notes": str(exc)}, args.out)
            return EXIT_FAIL
    verdict = verify_subdivision_embedding(host, col, mapping, task)
    _emit(verdict.to_json(), args.out)
    return EXIT_OK if verdict.ok else EXIT_FAIL


CSV_FIELDS = ["trial", "status", "failure", "gadget_ok", "red_edges", "expander_vertices", "core", "sigma_prime"]


def cmd_endtoend(args) -> int:
    params, table = _gen_params(args)
    task = _parse_task(args)
    coloring_file = None
    strategy = args.strategy
    if args.coloring:
        coloring_file = _load(args.coloring, "coloring")["coloring"]
        strategy = "file"
    cfg = ExperimentConfig(params, args.k, task, gadget_order=args.gadget_order, trials=args.trials, seed=args.seed,
                           coloring=strategy, coloring_file=coloring_file, embed=_embed_params(args))
    report = run_endtoend(cfg)
    report["preset"] = table
    _emit(report, args.out)
    if args.out:
        with open(Path(args.out).with_suffix(".csv"), "w", newline="") as fh:
            w = csv.DictWriter(fh, CSV_FIELDS)
            w.writeheader()
            for r in report["trials"]:
                sp = r.get("embedding", {}).get("sigma_prime")
                w.writerow({
                    "trial": r["trial"], "status": r["status"], "failure": (r.get("failure") or {}).get("kind", ""),
                    "gadget_ok": r.get("gadget_ok", ""), "red_edges": r.get("G_red", {}).get("e", ""),
                    "expander_vertices": r.get("expander", {}).get("vertices", ""),
                    "core": r.get("core", {}).get("vertices", ""),
                    "sigma_prime": "" if sp is None else ";".join(str(sp[k]) for k in sorted(sp, key=int)),
                })
    s = report["summary"]
    return EXIT_FAIL if s["unsound"] or s["invariant_breaches"] else EXIT_OK


# ------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--preset", default=None, help="desk preset name (default desk-small)")
    common.add_argument("--scale", default=None, help="preset name or numeric constant divisor")
    common.add_argument("--mode", choices=("induced", "plain"), default="plain")
    common.add_argument("--case", choices=("even", "general"), default="even")
    common.add_argument("--out", default=None)
    common.add_argument("--trials", type=int, default=1)
    common.add_argument("--retry", type=int, default=0)
    common.add_argument("--k", type=int, default=2)
    common.add_argument("--D", type=int, default=2)
    common.add_argument("--s", type=int, default=None, help="override the uniformity")

    p = argparse.ArgumentParser(prog="ramsey-forge", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("preset", parents=[common], help="print resolved parameters")
    sub.add_parser("generate", parents=[common], help="sample and prune a hypergraph")
    sp = sub.add_parser("substitute", parents=[common], help="place gadget copies on hyperedges")
    sp.add_argument("--hypergraph", required=False)
    sp.add_argument("--gadget-order", type=int, default=None)
    sp = sub.add_parser("color", parents=[common], help="colour host edges")
    sp.add_argument("--host")
    sp.add_argument("--strategy", choices=("uniform", "adversarial", "constant"), default="uniform")
    for name in ("extract", "embed", "lift", "verify"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--host")
        sp.add_argument("--coloring")
        if name in ("embed",):
            sp.add_argument("--edges", default=None, help="H edges like 0-1,1-2")
            sp.add_argument("--sigma", default="12")
            sp.add_argument("--no-audit", action="store_true")
        if name in ("lift", "verify"):
            sp.add_argument("--embedding")
    sp = sub.add_parser("endtoend", parents=[common], help="full pipeline over several trials")
    sp.add_argument("--edges", default=None)
    sp.add_argument("--sigma", default="12")
    sp.add_argument("--gadget-order", type=int, default=None)
    sp.add_argument("--strategy", choices=("uniform", "adversarial"), default="uniform")
    sp.add_argument("--coloring", default=None, help="colouring file used for every trial")
    sp.add_argument("--no-audit", action="store_true")
    return p


COMMANDS = {
    "preset": cmd_preset, "generate": cmd_generate, "substitute": cmd_substitute, "color": cmd_color,
    "extract": cmd_extract, "embed": cmd_embed, "lift": cmd_lift, "verify": cmd_verify, "endtoend": cmd_endtoend,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ramsey-forge: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"ramsey-forge: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
