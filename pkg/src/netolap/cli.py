"""Command-line client: build/generate pipelines plus query verbs that share
the HTTP service's handler layer, so both surfaces emit identical JSON."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from fastapi.encoders import jsonable_encoder

from .config import load_build_config
from .engine import CubeEngine
from .generator import GeneratorConfig, generate_synthetic
from .service.app import error_code
from .service.handlers import EngineHandlers
from .service.schemas import BacktrackRequest, LocalizeRequest
from .snapshot import load_snapshot, save_snapshot


def _print_json(model) -> None:
    print(json.dumps(jsonable_encoder(model), indent=2))


def _render_summary_table(doc: dict) -> str:
    rows = [("coordinate", doc["coordinate"] or "*"), ("members", doc["member_count"])]
    rows += [(k, v) for k, v in doc["summary"].items()]
    width = max(len(str(k)) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {'' if v is None else v}" for k, v in rows)


def _render_contrast_table(doc: dict) -> str:
    values = [c["value"] for c in doc["cells"]]
    header = ["statistic"] + values
    lines = [
        f"contrast along {doc['dimension']} (level {doc['level']}) at "
        f"{doc['fixed'] or '*'}"
    ]
    rows = [header]
    for stat, block in doc["statistics"].items():
        rows.append([stat] + [_fmt(v) for v in block["values"]])
        rows.append([f"  Δ prev"] + [_fmt(v) for v in block["delta_prev"]])
        rows.append([f"  ÷ mean"] + [_fmt(v) for v in block["ratio_vs_mean"]])
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(header))]
    for r in rows:
        lines.append("  ".join(f"{str(c):<{w}}" for c, w in zip(r, widths)))
    if doc["empty_siblings"]:
        lines.append("empty siblings: " + ", ".join(doc["empty_siblings"]))
    return "\n".join(lines)


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _load_engine(args) -> CubeEngine:
    if not args.snapshot:
        raise SystemExit("this command needs --snapshot")
    return load_snapshot(args.snapshot)


def cmd_generate(args) -> int:
    spec = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    data = generate_synthetic(GeneratorConfig.from_dict(spec))
    written = data.write(args.out)
    print(json.dumps({"written": sorted(written)}, indent=2))
    return 0


def cmd_build(args) -> int:
    config = load_build_config(args.config)
    engine = CubeEngine.build(config)
    out = Path(args.out)
    save_snapshot(engine, out)
    if args.export_allocation:
        Path(args.export_allocation).write_text(
            engine.allocation.export_jsonl(), encoding="utf-8"
        )
    print(
        json.dumps(
            {
                "snapshot": str(out),
                "nodes": engine.base.node_count(),
                "edges": engine.base.edge_count(),
                "dimensions": engine.lattice.dim_names,
                "cached_summaries": len(engine._summaries),
                "cached_embeddings": len(engine._embeddings),
            },
            indent=2,
        )
    )
    return 0


def cmd_dimensions(args) -> int:
    handlers = EngineHandlers(_load_engine(args))
    _print_json(handlers.dimensions())
    return 0


def cmd_summarize(args) -> int:
    handlers = EngineHandlers(_load_engine(args))
    response = handlers.cell_summary(args.cell)
    if args.json:
        _print_json(response)
    else:
        print(_render_summary_table(jsonable_encoder(response)))
    return 0


def cmd_contrast(args) -> int:
    handlers = EngineHandlers(_load_engine(args))
    response = handlers.contrast(args.fixed, args.dim, args.level)
    if args.json:
        _print_json(response)
    else:
        print(_render_contrast_table(jsonable_encoder(response)))
    return 0


def cmd_rollup(args) -> int:
    handlers = EngineHandlers(_load_engine(args))
    _print_json(
        handlers.rollup(
            args.dim, args.level, coord_text=args.cell, include_members=not args.no_members
        )
    )
    return 0


def cmd_drilldown(args) -> int:
    handlers = EngineHandlers(_load_engine(args))
    _print_json(handlers.drilldown(args.dim, args.level, args.super, coord_text=args.cell))
    return 0


def cmd_backtrack(args) -> int:
    handlers = EngineHandlers(_load_engine(args))
    query = json.loads(Path(args.query).read_text(encoding="utf-8"))
    request = BacktrackRequest(
        nodes=query.get("nodes", []),
        edges=[tuple(e) for e in query.get("edges", [])],
        k=args.k,
        gamma=args.gamma,
    )
    _print_json(handlers.backtrack(request))
    return 0


def cmd_mine(args) -> int:
    handlers = EngineHandlers(_load_engine(args))
    _print_json(
        handlers.cell_patterns(
            args.cell,
            min_support=args.min_support,
            max_edges=args.max_edges,
            weights=args.weights,
            contrast_dim=args.contrast_dim,
        )
    )
    return 0


def cmd_localize(args) -> int:
    handlers = EngineHandlers(_load_engine(args))
    request = LocalizeRequest(
        nodes=[n for n in args.nodes.split(",") if n],
        lam=args.lam,
        rho=args.rho,
        level=args.level,
    )
    _print_json(handlers.localize(request))
    return 0


def cmd_embed(args) -> int:
    handlers = EngineHandlers(_load_engine(args))
    _print_json(handlers.embed(args.cell, dim=args.dim))
    return 0


def cmd_prox(args) -> int:
    handlers = EngineHandlers(_load_engine(args))
    _print_json(handlers.cell_prox(args.cell, args.node, k=args.topk, other=args.other))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    engine = _load_engine(args)
    ui_dir = args.ui
    if ui_dir is None:
        default_ui = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = default_ui if default_ui.is_dir() else None
    app = create_app(engine, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netolap",
        description="Multi-facet network cube: build, explore, and mine cells",
    )
    parser.add_argument("--snapshot", help="snapshot file for query commands")
    parser.add_argument("--json", action="store_true", help="always print raw JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a synthetic network + taxonomies")
    p.add_argument("--spec", required=True, help="generator config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build", help="ingest, allocate, precompute, snapshot")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--export-allocation")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("dimensions", help="taxonomy trees")
    p.set_defaults(func=cmd_dimensions)

    p = sub.add_parser("summarize", help="structural summary of one cell")
    p.add_argument("--cell", default="")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("contrast", help="compare sibling cells along a dimension")
    p.add_argument("--fixed", default="")
    p.add_argument("--dim", required=True)
    p.add_argument("--level", type=int, required=True)
    p.set_defaults(func=cmd_contrast)

    p = sub.add_parser("rollup", help="super-node aggregate at a taxonomy level")
    p.add_argument("--dim", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--cell", default="")
    p.add_argument("--no-members", action="store_true")
    p.set_defaults(func=cmd_rollup)

    p = sub.add_parser("drilldown", help="expand one super-node back to base nodes")
    p.add_argument("--dim", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--super", required=True)
    p.add_argument("--cell", default="")
    p.set_defaults(func=cmd_drilldown)

    p = sub.add_parser("backtrack", help="top-k cells covering a network query")
    p.add_argument("--query", required=True, help="JSON file {nodes, edges}")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--gamma", type=float, default=None)
    p.set_defaults(func=cmd_backtrack)

    p = sub.add_parser("mine", help="closed patterns with contextual scores")
    p.add_argument("--cell", default="")
    p.add_argument("--min-support", type=int, default=None)
    p.add_argument("--max-edges", type=int, default=None)
    p.add_argument("--weights", default=None, help="p,i,d")
    p.add_argument("--contrast-dim", default=None)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("localize", help="greedy cell cover for a node set")
    p.add_argument("--nodes", required=True, help="comma separated ids")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--level", type=int, default=1)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("embed", help="spectral embedding metadata for a cell")
    p.add_argument("--cell", default="")
    p.add_argument("-d", "--dim", type=int, default=None)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("prox", help="conditional proximity inside a cell")
    p.add_argument("--cell", default="")
    p.add_argument("--node", required=True)
    p.add_argument("--topk", type=int, default=10)
    p.add_argument("--other", default=None)
    p.set_defaults(func=cmd_prox)

    p = sub.add_parser("serve", help="read-only HTTP API over a snapshot")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default=None, help="static UI directory to mount at /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (ValueError, KeyError) as exc:
        print(
            json.dumps({"code": error_code(exc), "message": str(exc)}),
            file=sys.stderr,
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
