"""Seeded synthetic data: planted-partition heterogeneous networks correlated
with generated taxonomies, plus ground truth for oracle-style tests.

All randomness flows from the config seed; repeated runs emit byte-identical
files.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class GeneratorError(ValueError):
    pass


@dataclass
class DimensionSpec:
    name: str
    levels: list[int]
    ordered: bool = False
    density_drift: list[float] | None = None

    def leaf_count(self) -> int:
        total = 1
        for b in self.levels:
            total *= b
        return total


@dataclass
class MotifSpec:
    cell: dict[str, str]
    node_types: list[str]
    edge_type: str = "motif"
    count: int = 1


@dataclass
class GeneratorConfig:
    seed: int
    dimensions: list[DimensionSpec]
    nodes_per_cell: int
    p_intra: float
    p_inter: float
    node_types: dict[str, float] = field(default_factory=lambda: {"entity": 1.0})
    seeds_per_cell: int = 3
    motifs: list[MotifSpec] = field(default_factory=list)
    build_params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dimensions = [
            d if isinstance(d, DimensionSpec) else DimensionSpec(**d) for d in self.dimensions
        ]
        self.motifs = [m if isinstance(m, MotifSpec) else MotifSpec(**m) for m in self.motifs]
        for p in (self.p_intra, self.p_inter):
            if not (0.0 <= p <= 1.0):
                raise GeneratorError(f"edge probability {p} outside [0, 1]")
        if self.nodes_per_cell < 1:
            raise GeneratorError("nodes_per_cell must be positive")
        if self.seeds_per_cell > self.nodes_per_cell:
            raise GeneratorError("seeds_per_cell cannot exceed nodes_per_cell")

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        dims = [
            DimensionSpec(
                name=spec["name"],
                levels=list(spec["levels"]),
                ordered=bool(spec.get("ordered", False)),
                density_drift=spec.get("density_drift"),
            )
            for spec in d["dimensions"]
        ]
        motifs = [
            MotifSpec(
                cell=dict(m["cell"]),
                node_types=list(m["node_types"]),
                edge_type=m.get("edge_type", "motif"),
                count=int(m.get("count", 1)),
            )
            for m in d.get("motifs", [])
        ]
        return cls(
            seed=int(d["seed"]),
            dimensions=dims,
            nodes_per_cell=int(d["nodes_per_cell"]),
            p_intra=float(d["p_intra"]),
            p_inter=float(d["p_inter"]),
            node_types=dict(d.get("node_types", {"entity": 1.0})),
            seeds_per_cell=int(d.get("seeds_per_cell", 3)),
            motifs=motifs,
            build_params=dict(d.get("build_params", {})),
        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "dimensions": [
                {
                    "name": d.name,
                    "levels": d.levels,
                    "ordered": d.ordered,
                    "density_drift": d.density_drift,
                }
                for d in self.dimensions
            ],
            "nodes_per_cell": self.nodes_per_cell,
            "p_intra": self.p_intra,
            "p_inter": self.p_inter,
            "node_types": self.node_types,
            "seeds_per_cell": self.seeds_per_cell,
            "motifs": [
                {
                    "cell": m.cell,
                    "node_types": m.node_types,
                    "edge_type": m.edge_type,
                    "count": m.count,
                }
                for m in self.motifs
            ],
            "build_params": self.build_params,
        }


def _dimension_tree(spec: DimensionSpec) -> tuple[dict, list[str]]:
    """Build the taxonomy JSON tree and the ordered leaf id list."""
    leaves: list[str] = []

    def expand(prefix: str, depth: int) -> list[dict]:
        children = []
        for i in range(spec.levels[depth]):
            vid = f"{prefix}{i}" if depth == 0 else f"{prefix}.{i}"
            node = {"id": vid, "name": vid, "aliases": [vid], "children": []}
            if depth + 1 < len(spec.levels):
                node["children"] = expand(vid, depth + 1)
            else:
                leaves.append(vid)
            children.append(node)
        return children

    tree = {"id": "*", "name": "all", "aliases": [], "children": expand(spec.name, 0)}
    return tree, leaves


def _decode_pairs(linear: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Invert the row-major upper-triangle pair indexing for m items."""
    lf = linear.astype(np.float64)
    i = np.floor(((2 * m - 1) - np.sqrt((2 * m - 1) ** 2 - 8 * lf)) / 2).astype(np.int64)
    start = i * (2 * m - i - 1) // 2
    j = (linear - start) + i + 1
    return i, j


def _sample_pairs(rng: np.random.Generator, m: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    npairs = m * (m - 1) // 2
    if npairs == 0 or p <= 0.0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    if p >= 1.0:
        iu, ju = np.triu_indices(m, k=1)
        return iu.astype(np.int64), ju.astype(np.int64)
    count = int(rng.binomial(npairs, p))
    if count == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    linear = rng.choice(npairs, size=count, replace=False)
    linear.sort()
    return _decode_pairs(linear, m)


@dataclass
class GeneratedData:
    nodes_jsonl: str
    edges_jsonl: str
    taxonomies: dict[str, dict]
    ground_truth: dict
    build_config: str

    def write(self, directory: str | Path) -> dict[str, str]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = {}
        for name, content in [
            ("nodes.jsonl", self.nodes_jsonl),
            ("edges.jsonl", self.edges_jsonl),
            ("ground_truth.json", json.dumps(self.ground_truth, sort_keys=True, indent=1) + "\n"),
            ("cube.conf", self.build_config),
        ]:
            (directory / name).write_text(content, encoding="utf-8")
            written[name] = str(directory / name)
        for dim, tree in self.taxonomies.items():
            name = f"taxonomy_{dim}.json"
            (directory / name).write_text(
                json.dumps(tree, sort_keys=True, indent=1) + "\n", encoding="utf-8"
            )
            written[name] = str(directory / name)
        return written


def generate_synthetic(config: GeneratorConfig) -> GeneratedData:
    """Planted-partition network over the product of taxonomy leaves."""
    rng = np.random.default_rng(config.seed)

    trees: dict[str, dict] = {}
    leaf_lists: list[list[str]] = []
    for spec in config.dimensions:
        tree, leaves = _dimension_tree(spec)
        trees[spec.name] = tree
        leaf_lists.append(leaves)
        if spec.density_drift is not None and len(spec.density_drift) != len(leaves):
            raise GeneratorError(
                f"density_drift of {spec.name!r} must list one factor per leaf"
            )

    cells = list(itertools.product(*leaf_lists))
    dim_names = [s.name for s in config.dimensions]
    cell_labels = [
        ",".join(f"{d}={v}" for d, v in zip(dim_names, combo)) for combo in cells
    ]
    n_cells = len(cells)
    total = n_cells * config.nodes_per_cell
    width = max(6, len(str(total)))
    node_ids = [f"n{idx:0{width}d}" for idx in range(total)]
    cell_of = np.repeat(np.arange(n_cells), config.nodes_per_cell)

    type_names = sorted(config.node_types)
    probs = np.array([config.node_types[t] for t in type_names], dtype=np.float64)
    if probs.sum() <= 0:
        raise GeneratorError("node type mix must have positive total weight")
    probs = probs / probs.sum()
    type_idx = rng.choice(len(type_names), size=total, p=probs)
    node_types = [type_names[i] for i in type_idx]

    # per-cell intra density, scaled by drift factors of ordered dimensions
    cell_p = np.full(n_cells, config.p_intra, dtype=np.float64)
    for d, spec in enumerate(config.dimensions):
        if spec.density_drift is None:
            continue
        leaf_index = {v: i for i, v in enumerate(leaf_lists[d])}
        for c, combo in enumerate(cells):
            cell_p[c] *= spec.density_drift[leaf_index[combo[d]]]
    if np.any(cell_p > 1.0) or np.any(cell_p < 0.0):
        raise GeneratorError("drifted intra-cell probability left [0, 1]")

    edge_pairs: list[tuple[int, int]] = []
    intra_counts: dict[str, int] = {}
    for c in range(n_cells):
        offset = c * config.nodes_per_cell
        iu, ju = _sample_pairs(rng, config.nodes_per_cell, float(cell_p[c]))
        intra_counts[cell_labels[c]] = len(iu)
        for a, b in zip(iu, ju):
            edge_pairs.append((offset + int(a), offset + int(b)))

    pair_counts: dict[str, int] = {}
    if config.p_inter > 0 and n_cells > 1:
        total_pairs = total * (total - 1) // 2
        intra_pairs = n_cells * (config.nodes_per_cell * (config.nodes_per_cell - 1) // 2)
        inter_target = int(rng.binomial(total_pairs - intra_pairs, config.p_inter))
        picked: set[int] = set()
        guard = 0
        while len(picked) < inter_target and guard < 200:
            guard += 1
            batch = max(1024, 2 * (inter_target - len(picked)))
            u = rng.integers(0, total, size=batch)
            v = rng.integers(0, total, size=batch)
            lo = np.minimum(u, v)
            hi = np.maximum(u, v)
            ok = (lo != hi) & (cell_of[lo] != cell_of[hi])
            for a, b in zip(lo[ok], hi[ok]):
                if len(picked) >= inter_target:
                    break
                packed = int(a) * total + int(b)
                if packed not in picked:
                    picked.add(packed)
        for packed in sorted(picked):
            a, b = divmod(packed, total)
            edge_pairs.append((a, b))
            ka, kb = sorted((cell_labels[cell_of[a]], cell_labels[cell_of[b]]))
            pair_counts[f"{ka}||{kb}"] = pair_counts.get(f"{ka}||{kb}", 0) + 1

    # seed nodes carry their true leaf values as dimension attributes
    attrs: dict[int, dict[str, str]] = {}
    for c in range(n_cells):
        offset = c * config.nodes_per_cell
        for s in range(config.seeds_per_cell):
            attrs[offset + s] = {d: v for d, v in zip(dim_names, cells[c])}

    motif_records = []
    motif_edges: list[tuple[int, int, str]] = []
    if config.motifs:
        reserved: set[int] = set()
        label_to_cell = {lbl: i for i, lbl in enumerate(cell_labels)}
        for motif in config.motifs:
            label = ",".join(f"{d}={motif.cell[d]}" for d in dim_names)
            if label not in label_to_cell:
                raise GeneratorError(f"motif cell {label!r} does not exist")
            c = label_to_cell[label]
            offset = c * config.nodes_per_cell
            members = list(range(offset, offset + config.nodes_per_cell))
            for _ in range(motif.count):
                chosen: list[int] = []
                for want in motif.node_types:
                    pick = next(
                        (
                            m
                            for m in members
                            if m not in reserved and m not in chosen and node_types[m] == want
                        ),
                        None,
                    )
                    if pick is None:
                        raise GeneratorError(
                            f"cell {label!r} lacks nodes to plant motif {motif.node_types}"
                        )
                    chosen.append(pick)
                reserved.update(chosen)
                for x, y in itertools.combinations(chosen, 2):
                    motif_edges.append((min(x, y), max(x, y), motif.edge_type))
                motif_records.append(
                    {
                        "cell": label,
                        "nodes": [node_ids[m] for m in chosen],
                        "edge_type": motif.edge_type,
                    }
                )

    node_lines = []
    for idx in range(total):
        node_lines.append(
            json.dumps(
                {
                    "id": node_ids[idx],
                    "type": node_types[idx],
                    "name": f"entity {node_ids[idx]}",
                    "attrs": attrs.get(idx, {}),
                },
                sort_keys=True,
            )
        )

    typed_edges = [
        (a, b, "~".join(sorted((node_types[a], node_types[b])))) for a, b in edge_pairs
    ]
    typed_edges.extend(motif_edges)
    typed_edges.sort(key=lambda e: (node_ids[e[0]], node_ids[e[1]], e[2]))
    edge_lines = [
        json.dumps(
            {"src": node_ids[a], "dst": node_ids[b], "type": et, "weight": 1.0},
            sort_keys=True,
        )
        for a, b, et in typed_edges
    ]

    cell_members = {
        cell_labels[c]: node_ids[c * config.nodes_per_cell : (c + 1) * config.nodes_per_cell]
        for c in range(n_cells)
    }
    ground_truth = {
        "config": config.to_dict(),
        "cells": {
            node_ids[idx]: {d: v for d, v in zip(dim_names, cells[cell_of[idx]])}
            for idx in range(total)
        },
        "cell_members": cell_members,
        "intra_edge_counts": intra_counts,
        "pair_edge_counts": pair_counts,
        "cell_probabilities": {cell_labels[c]: float(cell_p[c]) for c in range(n_cells)},
        "motifs": motif_records,
        "emitted_edge_count": len(typed_edges),
    }

    conf_lines = ["# generated build configuration", "nodes = nodes.jsonl", "edges = edges.jsonl"]
    for d in dim_names:
        conf_lines.append(f"dimension.{d} = taxonomy_{d}.json")
    for key, value in sorted(config.build_params.items()):
        conf_lines.append(f"{key} = {value}")
    conf_lines.append(f"seed = {config.seed}")

    return GeneratedData(
        nodes_jsonl="\n".join(node_lines) + "\n",
        edges_jsonl="\n".join(edge_lines) + ("\n" if edge_lines else ""),
        taxonomies=trees,
        ground_truth=ground_truth,
        build_config="\n".join(conf_lines) + "\n",
    )
