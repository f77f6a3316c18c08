"""Top-k retrieval of cube cells covering a network query.

Score combines query coverage with cell precision; coverage is monotone
non-increasing under coordinate refinement, which makes it a sound upper
bound for best-first lattice search with pruning.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable

from .olap import Cell
from .taxonomy import CellCoordinate, CubeLattice

DEFAULT_GAMMA = 0.25


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkQuery:
    nodes: frozenset[str]
    edges: frozenset[frozenset[str]]

    @classmethod
    def from_parts(cls, nodes, edges=()) -> "NetworkQuery":
        node_set = frozenset(nodes)
        if not node_set:
            raise QueryError("query must contain at least one node")
        edge_set = set()
        for pair in edges:
            u, v = pair
            if u not in node_set or v not in node_set:
                raise QueryError(f"query edge ({u!r}, {v!r}) has an endpoint outside the node set")
            if u == v:
                continue
            edge_set.add(frozenset((u, v)))
        return cls(node_set, frozenset(edge_set))

    @classmethod
    def from_dict(cls, payload: dict) -> "NetworkQuery":
        return cls.from_parts(payload.get("nodes", []), payload.get("edges", []))

    def to_dict(self) -> dict:
        return {
            "nodes": sorted(self.nodes),
            "edges": sorted([sorted(e) for e in self.edges]),
        }


@dataclass
class CellHit:
    coordinate: str
    score: float
    coverage: float
    precision: float

    def to_dict(self) -> dict:
        return {
            "coordinate": self.coordinate,
            "score": self.score,
            "coverage": self.coverage,
            "precision": self.precision,
        }


def _query_overlap(cell: Cell, q: NetworkQuery) -> tuple[int, int]:
    member_set = set(cell.members)
    node_hits = sum(1 for n in q.nodes if n in member_set)
    edge_hits = 0
    if q.edges and node_hits >= 2:
        pairs = set()
        for e in cell.subnetwork.edges:
            if e.src != e.dst:
                pairs.add(frozenset((e.src, e.dst)))
        edge_hits = sum(1 for e in q.edges if e in pairs)
    return node_hits, edge_hits


def coverage_of(cell: Cell, q: NetworkQuery) -> float:
    node_hits, edge_hits = _query_overlap(cell, q)
    return (node_hits + edge_hits) / (len(q.nodes) + len(q.edges))


def score_cell(cell: Cell, q: NetworkQuery, gamma: float = DEFAULT_GAMMA) -> CellHit:
    """coverage = matched (nodes + edges) / query size; precision = matched
    nodes / cell size; score = coverage * precision^gamma."""
    if gamma < 0:
        raise QueryError(f"gamma must be non-negative, got {gamma}")
    node_hits, edge_hits = _query_overlap(cell, q)
    coverage = (node_hits + edge_hits) / (len(q.nodes) + len(q.edges))
    precision = node_hits / len(cell.members) if cell.members else 0.0
    score = coverage * (precision**gamma) if coverage > 0 else 0.0
    return CellHit(
        coordinate=cell.coordinate_string,
        score=score,
        coverage=coverage,
        precision=precision,
    )


def topk_backtrack(
    q: NetworkQuery,
    k: int,
    lattice: CubeLattice,
    get_cell: Callable[[CellCoordinate], Cell],
    gamma: float = DEFAULT_GAMMA,
) -> list[CellHit]:
    """Best-first search from the top coordinate with coverage-bound pruning.

    Children of a coordinate are skipped once its coverage falls strictly
    below the current k-th best score; the result matches exhaustive
    enumeration, with ties broken by canonical coordinate string.
    """
    if k < 1:
        raise QueryError(f"k must be at least 1, got {k}")

    top = lattice.top()
    # heap of (-upper_bound, coordinate_string, coordinate)
    frontier: list[tuple[float, str, CellCoordinate]] = []
    visited: set[CellCoordinate] = {top}
    best: list[tuple[float, str, CellHit]] = []  # sorted ascending by (score, rev-string)

    def consider(coord: CellCoordinate) -> float:
        cell = get_cell(coord)
        hit = score_cell(cell, q, gamma=gamma)
        entry = (hit.score, hit.coordinate, hit)
        best.append(entry)
        best.sort(key=lambda e: (-e[0], e[1]))
        del best[k:]
        return coverage_of(cell, q)

    def kth_score() -> float:
        if len(best) < k:
            return -1.0
        return best[-1][0]

    ub0 = consider(top)
    heapq.heappush(frontier, (-ub0, lattice.canonical_string(top), top))
    while frontier:
        neg_ub, _, coord = heapq.heappop(frontier)
        ub = -neg_ub
        if ub < kth_score():
            continue  # pruned: no descendant can beat the current k-th best
        for child in lattice.children_coordinates(coord):
            if child in visited:
                continue
            visited.add(child)
            child_ub = consider(child)
            heapq.heappush(frontier, (-child_ub, lattice.canonical_string(child), child))
    return [hit for _, _, hit in best]
