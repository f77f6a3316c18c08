"""Weakly-supervised node-to-taxonomy assignment.

Seeds come from surface-name matching; a clamped, damped propagation over
the undirected projection spreads per-leaf score mass, and each node is
assigned the deepest taxonomy value whose subtree accumulates at least the
confidence threshold of raw mass (the root "*" when nothing does).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import diags

from .network import HeterogeneousNetwork, undirected_projection
from .taxonomy import ROOT_ID, CubeLattice, Taxonomy

logger = logging.getLogger(__name__)


@dataclass
class DimensionAssignment:
    """Per-dimension result: aligned arrays over the network's node order."""

    dimension: str
    values: list[str]
    confidences: np.ndarray
    seeded: np.ndarray

    def as_mapping(self, node_ids: list[str]) -> dict[str, tuple[str, float]]:
        return {
            nid: (v, float(c))
            for nid, v, c in zip(node_ids, self.values, self.confidences)
        }


@dataclass
class Allocation:
    """Assignments for every dimension over one base network."""

    node_ids: list[str]
    dimensions: dict[str, DimensionAssignment] = field(default_factory=dict)

    def value_of(self, node_id: str, dim: str) -> str:
        idx = self._index()[node_id]
        return self.dimensions[dim].values[idx]

    def _index(self) -> dict[str, int]:
        if not hasattr(self, "_idx"):
            self._idx = {nid: i for i, nid in enumerate(self.node_ids)}
        return self._idx

    def _euler_positions(self, tax: Taxonomy) -> tuple[np.ndarray, np.ndarray]:
        """Per-node (tin, tout) of the assigned value, cached per dimension."""
        if not hasattr(self, "_euler_cache"):
            self._euler_cache: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        cached = self._euler_cache.get(tax.dimension_name)
        if cached is None:
            ids, tin, tout = tax.euler_arrays()
            tin_of = dict(zip(ids, tin))
            tout_of = dict(zip(ids, tout))
            assign = self.dimensions[tax.dimension_name]
            n = len(assign.values)
            node_tin = np.fromiter((tin_of[v] for v in assign.values), dtype=np.int64, count=n)
            node_tout = np.fromiter((tout_of[v] for v in assign.values), dtype=np.int64, count=n)
            cached = (node_tin, node_tout)
            self._euler_cache[tax.dimension_name] = cached
        return cached

    def membership_mask(self, coord, lattice: CubeLattice) -> np.ndarray:
        """Boolean mask over node order: assigned values descend from `coord`."""
        mask = np.ones(len(self.node_ids), dtype=bool)
        for i, tax in enumerate(lattice.dimensions):
            node_tin, node_tout = self._euler_positions(tax)
            ids, tin, tout = tax.euler_arrays()
            pos = ids.index(coord[i])
            mask &= (tin[pos] <= node_tin) & (node_tout <= tout[pos])
        return mask

    def export_jsonl(self) -> str:
        """One record per (node, dimension): {"node","dim","value","confidence","seeded"}."""
        lines = []
        for dim in self.dimensions:
            assign = self.dimensions[dim]
            for i, nid in enumerate(self.node_ids):
                lines.append(
                    json.dumps(
                        {
                            "node": nid,
                            "dim": dim,
                            "value": assign.values[i],
                            "confidence": float(assign.confidences[i]),
                            "seeded": bool(assign.seeded[i]),
                        },
                        sort_keys=True,
                    )
                )
        return "\n".join(lines) + ("\n" if lines else "")


def seed_by_surface_match(net: HeterogeneousNetwork, tax: Taxonomy) -> dict[str, str]:
    """Match node surface names and dimension attributes against value names/aliases.

    A node matching values in different branches is ambiguous and left
    unseeded; matches along a single root-to-leaf chain seed the deepest one.
    """
    seeds: dict[str, str] = {}
    dim = tax.dimension_name
    for node in net.nodes:
        matched: list[str] = []
        for text in (node.surface_name, node.attrs.get(dim, "")):
            if not text:
                continue
            for v in tax.match_values(text):
                if v not in matched:
                    matched.append(v)
        if not matched:
            continue
        if len(matched) == 1:
            seeds[node.id] = matched[0]
            continue
        deepest = max(matched, key=lambda v: (tax.depth(v), v))
        if all(tax.is_descendant_or_equal(deepest, v) for v in matched):
            seeds[node.id] = deepest
        else:
            logger.info(
                "node %s matches values in different branches (%s); left unseeded",
                node.id,
                ",".join(sorted(matched)),
            )
    return seeds


def _deepest_covering(tax: Taxonomy, leaf_ids: list[str], mass: np.ndarray, tau: float) -> tuple[str, float]:
    """Deepest value whose subtree holds >= tau raw mass; ties to smallest id."""
    subtree: dict[str, float] = {}
    for leaf, m in zip(leaf_ids, mass):
        if m <= 0:
            continue
        for anc in tax.ancestors(leaf):
            subtree[anc] = subtree.get(anc, 0.0) + float(m)
    best = (ROOT_ID, float(subtree.get(ROOT_ID, 0.0)))
    best_depth = -1
    for v, m in subtree.items():
        if m >= tau:
            d = tax.depth(v)
            if d > best_depth or (d == best_depth and v < best[0]):
                best = (v, m)
                best_depth = d
    if best_depth < 0:
        return ROOT_ID, float(subtree.get(ROOT_ID, 0.0))
    return best


def propagate_labels(
    net: HeterogeneousNetwork,
    seeds: dict[str, str],
    tax: Taxonomy,
    alpha: float = 0.85,
    iters: int = 50,
    tau: float = 0.4,
) -> DimensionAssignment:
    """Clamped damped propagation of per-leaf score vectors.

    Update: s(t+1) = (1-alpha) * seed_indicator + alpha * row-normalized
    neighbor average of s(t); seeded rows are reset to their indicator every
    round. Assignment: the argmax leaf when its score reaches tau, else the
    deepest value whose subtree mass reaches tau, else the root.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if iters <= 0:
        raise ValueError(f"iters must be positive, got {iters}")

    n = net.node_count()
    leaf_ids = [v for v in tax.leaves() if v != ROOT_ID] or [ROOT_ID]
    leaf_pos = {v: j for j, v in enumerate(leaf_ids)}
    k = len(leaf_ids)

    if n == 0:
        return DimensionAssignment(
            tax.dimension_name, [], np.zeros(0), np.zeros(0, dtype=bool)
        )

    # seed indicator: a seed at an internal value spreads uniformly over its leaves
    indicator = np.zeros((n, k), dtype=np.float64)
    seeded = np.zeros(n, dtype=bool)
    for nid, value in seeds.items():
        i = net.node_index(nid)
        seeded[i] = True
        covered = [lf for lf in leaf_ids if tax.is_descendant_or_equal(lf, value)]
        if covered:
            share = 1.0 / len(covered)
            for lf in covered:
                indicator[i, leaf_pos[lf]] = share

    proj = undirected_projection(net)
    mat = proj.csr_matrix()
    row_sums = np.asarray(mat.sum(axis=1)).ravel()
    inv = np.zeros_like(row_sums)
    positive = row_sums > 0
    inv[positive] = 1.0 / row_sums[positive]
    transition = diags(inv) @ mat

    scores = indicator.copy()
    for _ in range(iters):
        scores = (1.0 - alpha) * indicator + alpha * (transition @ scores)
        scores[seeded] = indicator[seeded]

    # leaf order is not id-sorted in general; resolve argmax ties to smallest id
    leaf_rank = np.argsort(np.argsort(leaf_ids, kind="stable"), kind="stable")
    best = np.argmax(scores, axis=1)
    best_val = scores[np.arange(n), best]
    tie_rows = np.flatnonzero((scores == best_val[:, None]).sum(axis=1) > 1)
    for i in tie_rows:
        tied = np.flatnonzero(scores[i] == best_val[i])
        best[i] = tied[np.argmin(leaf_rank[tied])]

    values: list[str] = []
    confidences = np.zeros(n, dtype=np.float64)
    direct = best_val >= tau
    for i in range(n):
        if direct[i]:
            values.append(leaf_ids[best[i]])
            confidences[i] = best_val[i]
        else:
            value, mass = _deepest_covering(tax, leaf_ids, scores[i], tau)
            values.append(value)
            confidences[i] = min(mass, 1.0)
    return DimensionAssignment(tax.dimension_name, values, confidences, seeded)


def allocate(
    net: HeterogeneousNetwork,
    lattice: CubeLattice,
    alpha: float = 0.85,
    iters: int = 50,
    tau: float = 0.4,
) -> Allocation:
    """Seed and propagate every dimension independently."""
    allocation = Allocation(node_ids=net.node_ids())
    for tax in lattice.dimensions:
        seeds = seed_by_surface_match(net, tax)
        allocation.dimensions[tax.dimension_name] = propagate_labels(
            net, seeds, tax, alpha=alpha, iters=iters, tau=tau
        )
    return allocation
