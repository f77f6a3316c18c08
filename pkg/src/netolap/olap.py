"""Cell materialization, roll-up/drill-down aggregation, and structural summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph

from .allocation import Allocation
from .network import HeterogeneousNetwork, UndirectedGraph, induced_subnetwork, undirected_projection
from .taxonomy import CellCoordinate, CoordinateError, CubeLattice

EXACT_CPL_LIMIT = 5000
CPL_SAMPLE_SOURCES = 1000
CPL_SAMPLE_SEED = 97
_BFS_CHUNK = 256


class EmptyContrastError(ValueError):
    pass


@dataclass
class Cell:
    coordinate: CellCoordinate
    coordinate_string: str
    members: list[str]
    subnetwork: HeterogeneousNetwork

    def is_empty(self) -> bool:
        return not self.members


@dataclass
class AggregatedGraph:
    """Super-node graph for one grouping dimension at one taxonomy level.

    Intra-group edge weight accumulates into a self-loop so that the total
    super-edge weight equals the total base edge weight among covered nodes.
    """

    dimension: str
    level: int
    super_nodes: list[str]
    provenance: dict[str, list[str]]
    super_edges: dict[tuple[str, str], float]

    def total_weight(self) -> float:
        return float(sum(self.super_edges.values()))

    def to_dict(self, include_members: bool = True) -> dict:
        out = {
            "dimension": self.dimension,
            "level": self.level,
            "super_nodes": [
                {
                    "value": g,
                    "size": len(self.provenance[g]),
                    **({"members": self.provenance[g]} if include_members else {}),
                }
                for g in self.super_nodes
            ],
            "super_edges": [
                {"source": a, "target": b, "weight": w}
                for (a, b), w in sorted(self.super_edges.items())
            ],
        }
        return out


@dataclass
class NetworkSummary:
    node_count: int = 0
    edge_count: int = 0
    triangle_count: int = 0
    global_clustering: float = 0.0
    avg_local_clustering: float = 0.0
    characteristic_path_length: float | None = None
    component_count: int = 0
    degree_min: int = 0
    degree_median: float = 0.0
    degree_mean: float = 0.0
    degree_max: int = 0
    cpl_method: str | None = None
    cpl_sample_seed: int | None = None

    STAT_FIELDS = (
        "node_count",
        "edge_count",
        "triangle_count",
        "global_clustering",
        "avg_local_clustering",
        "characteristic_path_length",
        "component_count",
        "degree_min",
        "degree_median",
        "degree_mean",
        "degree_max",
    )

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "triangle_count": self.triangle_count,
            "global_clustering": self.global_clustering,
            "avg_local_clustering": self.avg_local_clustering,
            "characteristic_path_length": self.characteristic_path_length,
            "component_count": self.component_count,
            "degree_min": self.degree_min,
            "degree_median": self.degree_median,
            "degree_mean": self.degree_mean,
            "degree_max": self.degree_max,
            "cpl_method": self.cpl_method,
            "cpl_sample_seed": self.cpl_sample_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkSummary":
        return cls(**{k: d[k] for k in d if k in cls.__dataclass_fields__})


def cell_members(
    coord: CellCoordinate,
    allocation: Allocation,
    lattice: CubeLattice,
    base: HeterogeneousNetwork,
) -> list[str]:
    """Nodes whose assigned value in every dimension descends from the coordinate."""
    mask = allocation.membership_mask(coord, lattice)
    return [base.nodes[j].id for j in np.flatnonzero(mask)]


def materialize_cell(
    coord: CellCoordinate,
    allocation: Allocation,
    lattice: CubeLattice,
    base: HeterogeneousNetwork,
) -> Cell:
    members = cell_members(coord, allocation, lattice, base)
    return Cell(
        coordinate=coord,
        coordinate_string=lattice.canonical_string(coord),
        members=members,
        subnetwork=induced_subnetwork(base, members),
    )


def rollup(
    net: HeterogeneousNetwork,
    node_values: dict[str, str],
    lattice: CubeLattice,
    dimension: str,
    level: int,
) -> AggregatedGraph:
    """Merge nodes into super-nodes at `level` of `dimension`'s taxonomy.

    A node allocated above `level` keeps its own (shallower) value as its
    group, so every covered node lands in exactly one super-node.
    """
    tax = lattice.taxonomy(dimension)
    if level > tax.max_depth:
        raise CoordinateError(
            f"level {level} exceeds depth {tax.max_depth} of dimension {dimension!r}"
        )
    groups: dict[str, list[str]] = {}
    group_of: dict[str, str] = {}
    for node in net.nodes:
        g = tax.ancestor_at_depth(node_values[node.id], level)
        group_of[node.id] = g
        groups.setdefault(g, []).append(node.id)
    super_edges: dict[tuple[str, str], float] = {}
    for e in net.edges:
        a, b = group_of[e.src], group_of[e.dst]
        key = (a, b) if a <= b else (b, a)
        super_edges[key] = super_edges.get(key, 0.0) + e.weight
    return AggregatedGraph(
        dimension=dimension,
        level=level,
        super_nodes=sorted(groups),
        provenance={g: groups[g] for g in sorted(groups)},
        super_edges=super_edges,
    )


def drilldown(agg: AggregatedGraph, super_node: str, base: HeterogeneousNetwork) -> HeterogeneousNetwork:
    if super_node not in agg.provenance:
        raise KeyError(f"unknown super-node {super_node!r}")
    return induced_subnetwork(base, agg.provenance[super_node])


def count_triangles(g: UndirectedGraph) -> int:
    """Exact triangle count by sorted-neighbor intersection over oriented edges."""
    deg = g.degrees()
    rank = np.lexsort((np.arange(g.n), deg))
    pos = np.empty(g.n, dtype=np.int64)
    pos[rank] = np.arange(g.n)
    fwd: list[list[int]] = [[] for _ in range(g.n)]
    for u, v in zip(g.edge_u, g.edge_v):
        if pos[u] < pos[v]:
            fwd[u].append(v)
        else:
            fwd[v].append(u)
    fwd_sorted = [np.array(sorted(nbrs), dtype=np.int64) for nbrs in fwd]
    total = 0
    for u, v in zip(g.edge_u, g.edge_v):
        if pos[u] < pos[v]:
            a, b = fwd_sorted[u], fwd_sorted[v]
        else:
            a, b = fwd_sorted[v], fwd_sorted[u]
        if len(a) and len(b):
            total += np.intersect1d(a, b, assume_unique=True).size
    return int(total)


def local_clustering(g: UndirectedGraph) -> np.ndarray:
    """Per-node clustering coefficient; 0 for degree < 2."""
    coeff = np.zeros(g.n, dtype=np.float64)
    neighbor_sets = [set(g.neighbors(i).tolist()) for i in range(g.n)]
    for i in range(g.n):
        nbrs = g.neighbors(i)
        d = len(nbrs)
        if d < 2:
            continue
        links = 0
        for j in nbrs:
            links += len(neighbor_sets[i] & neighbor_sets[j])
        # each triangle through i counted twice in the intersection sweep
        coeff[i] = links / (d * (d - 1))
    return coeff


def _largest_component(g: UndirectedGraph) -> tuple[int, np.ndarray]:
    if g.n == 0:
        return 0, np.empty(0, dtype=np.int64)
    n_comp, labels = csgraph.connected_components(g.csr_matrix(), directed=False)
    sizes = np.bincount(labels, minlength=n_comp)
    best = int(np.argmax(sizes))
    return n_comp, np.flatnonzero(labels == best)


def _mean_bfs_distance(csr, sources: np.ndarray, n: int) -> tuple[float, int]:
    """Sum of BFS distances from each source to all other reachable nodes."""
    total = 0.0
    pairs = 0
    for start in range(0, len(sources), _BFS_CHUNK):
        chunk = sources[start : start + _BFS_CHUNK]
        dist = csgraph.shortest_path(csr, method="D", unweighted=True, directed=False, indices=chunk)
        finite = np.isfinite(dist)
        total += float(dist[finite].sum())
        pairs += int(finite.sum()) - len(chunk)  # drop the zero self-distances
    return total, pairs


def summarize_network(
    net: HeterogeneousNetwork,
    cpl_sample_seed: int = CPL_SAMPLE_SEED,
) -> NetworkSummary:
    """Structural statistics over the undirected projection.

    Characteristic path length is the mean pairwise distance within the
    largest connected component: exact all-pairs BFS up to 5000 nodes,
    otherwise estimated from 1000 seeded sample sources (seed recorded).
    """
    summary = NetworkSummary(node_count=net.node_count(), edge_count=net.edge_count())
    if net.node_count() == 0:
        return summary
    g = undirected_projection(net)
    degrees = g.degrees()
    summary.degree_min = int(degrees.min())
    summary.degree_max = int(degrees.max())
    summary.degree_mean = float(degrees.mean())
    summary.degree_median = float(np.median(degrees))

    triangles = count_triangles(g)
    summary.triangle_count = triangles
    wedges = float((degrees.astype(np.float64) * (degrees - 1) / 2.0).sum())
    summary.global_clustering = (3.0 * triangles / wedges) if wedges > 0 else 0.0
    summary.avg_local_clustering = float(local_clustering(g).mean())

    n_comp, lcc = _largest_component(g)
    summary.component_count = int(n_comp)
    if len(lcc) >= 2:
        sub = g.csr_matrix()[lcc][:, lcc]
        m = len(lcc)
        if m <= EXACT_CPL_LIMIT:
            total, pairs = _mean_bfs_distance(sub, np.arange(m), m)
            summary.characteristic_path_length = total / pairs
            summary.cpl_method = "exact"
        else:
            rng = np.random.default_rng(cpl_sample_seed)
            sources = np.sort(rng.choice(m, size=CPL_SAMPLE_SOURCES, replace=False))
            total, pairs = _mean_bfs_distance(sub, sources, m)
            summary.characteristic_path_length = total / pairs
            summary.cpl_method = "sampled"
            summary.cpl_sample_seed = cpl_sample_seed
    return summary


def summarize_cell(cell: Cell, cpl_sample_seed: int = CPL_SAMPLE_SEED) -> NetworkSummary:
    return summarize_network(cell.subnetwork, cpl_sample_seed=cpl_sample_seed)


@dataclass
class ContrastTable:
    fixed: str
    dimension: str
    level: int
    cells: list[dict] = field(default_factory=list)
    statistics: dict[str, dict] = field(default_factory=dict)
    empty_siblings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "fixed": self.fixed,
            "dimension": self.dimension,
            "level": self.level,
            "cells": self.cells,
            "statistics": self.statistics,
            "empty_siblings": self.empty_siblings,
        }


def build_contrast_table(
    fixed: str,
    dimension: str,
    level: int,
    entries: list[tuple[str, str, NetworkSummary]],
    empty_siblings: list[str],
) -> ContrastTable:
    """Assemble the per-statistic delta/ratio table from sibling summaries.

    `entries` lists (value id, coordinate string, summary) in taxonomy child
    order for the non-empty siblings.
    """
    if not entries:
        raise EmptyContrastError(
            f"no non-empty sibling cells for dimension {dimension!r} at level {level}"
        )
    table = ContrastTable(fixed=fixed, dimension=dimension, level=level, empty_siblings=empty_siblings)
    for value, coord_str, summary in entries:
        table.cells.append({"value": value, "coordinate": coord_str, "summary": summary.to_dict()})
    for stat in NetworkSummary.STAT_FIELDS:
        values = [getattr(s, stat) for _, _, s in entries]
        present = [v for v in values if v is not None]
        mean = (sum(present) / len(present)) if present else None
        deltas: list[float | None] = []
        ratios: list[float | None] = []
        prev = None
        for v in values:
            if v is None or prev is None:
                deltas.append(None)
            else:
                deltas.append(v - prev)
            if v is not None:
                prev = v
            if v is None or mean is None:
                ratios.append(None)
            elif mean == 0:
                ratios.append(1.0 if v == 0 else None)
            else:
                ratios.append(v / mean)
        table.statistics[stat] = {
            "values": values,
            "mean": mean,
            "delta_prev": deltas,
            "ratio_vs_mean": ratios,
        }
    return table
