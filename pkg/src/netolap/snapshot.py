"""Single-file cube snapshot: canonical JSON inside deterministic gzip.

The snapshot is self-contained (network, taxonomies, allocation, caches,
build parameters and seeds); identical inputs produce byte-identical files,
and loading never consults the original input files.
"""

from __future__ import annotations

import gzip
import json
from pathlib import Path

import numpy as np

from .allocation import Allocation, DimensionAssignment
from .engine import CubeEngine
from .network import HeterogeneousNetwork, TypedEdge, TypedNode
from .olap import NetworkSummary
from .proximity import CellEmbedding
from .taxonomy import CubeLattice, load_taxonomy

SNAPSHOT_VERSION = "netolap-snapshot/1"


class SnapshotError(ValueError):
    pass


def _engine_payload(engine: CubeEngine) -> dict:
    network = {
        "nodes": [n.to_record() for n in engine.base.nodes],
        "edges": [e.to_record() for e in engine.base.edges],
    }
    allocation = {}
    for dim, assign in engine.allocation.dimensions.items():
        allocation[dim] = {
            "values": list(assign.values),
            "confidences": [float(c) for c in assign.confidences],
            "seeded": [bool(s) for s in assign.seeded],
        }
    params = dict(engine.params)
    params["weights"] = list(params.get("weights", (1.0, 1.0, 1.0)))
    params["precompute"] = list(params.get("precompute", ()))
    return {
        "version": SNAPSHOT_VERSION,
        "params": params,
        "dimension_order": list(engine.lattice.dim_names),
        "taxonomies": engine.dimension_trees(),
        "network": network,
        "allocation": allocation,
        "summaries": {k: s.to_dict() for k, s in sorted(engine._summaries.items())},
        "embeddings": {k: e.to_dict() for k, e in sorted(engine._embeddings.items())},
    }


def save_snapshot(engine: CubeEngine, path: str | Path) -> Path:
    path = Path(path)
    payload = json.dumps(_engine_payload(engine), sort_keys=True, separators=(",", ":"))
    # fixed mtime and no embedded filename keep the gzip container byte-stable
    with open(path, "wb") as fh:
        with gzip.GzipFile(filename="", fileobj=fh, mode="wb", mtime=0) as gz:
            gz.write(payload.encode("utf-8"))
    return path


def load_snapshot(path: str | Path) -> CubeEngine:
    path = Path(path)
    try:
        with gzip.open(path, "rb") as gz:
            payload = json.loads(gz.read().decode("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
    version = payload.get("version")
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(
            f"snapshot version mismatch: file has {version!r}, engine expects {SNAPSHOT_VERSION!r}"
        )

    nodes = [
        TypedNode(r["id"], r["type"], r.get("name", ""), dict(r.get("attrs", {})))
        for r in payload["network"]["nodes"]
    ]
    edges = [
        TypedEdge(r["src"], r["dst"], r["type"], float(r.get("weight", 1.0)))
        for r in payload["network"]["edges"]
    ]
    base = HeterogeneousNetwork(nodes, edges)

    taxonomies = [
        load_taxonomy(payload["taxonomies"][dim], dim) for dim in payload["dimension_order"]
    ]
    lattice = CubeLattice(taxonomies)

    allocation = Allocation(node_ids=base.node_ids())
    for dim in payload["dimension_order"]:
        stored = payload["allocation"][dim]
        allocation.dimensions[dim] = DimensionAssignment(
            dimension=dim,
            values=list(stored["values"]),
            confidences=np.asarray(stored["confidences"], dtype=np.float64),
            seeded=np.asarray(stored["seeded"], dtype=bool),
        )

    params = dict(payload["params"])
    if "weights" in params:
        params["weights"] = tuple(params["weights"])
    if "precompute" in params:
        params["precompute"] = tuple(params["precompute"])
    engine = CubeEngine(base, lattice, allocation, params=params)
    for key, summary in payload.get("summaries", {}).items():
        engine._summaries[key] = NetworkSummary.from_dict(summary)
    for key, emb in payload.get("embeddings", {}).items():
        engine._embeddings[key] = CellEmbedding.from_dict(emb)
    return engine
