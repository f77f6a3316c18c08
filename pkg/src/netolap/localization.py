"""Query-specific network construction by greedy cell-union cover.

Chooses a small set of cells whose union covers a queried node set,
maximizing coverage minus a size penalty, and emits the complete induced
base subnetwork over the union.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .network import HeterogeneousNetwork, induced_subnetwork
from .olap import Cell

DEFAULT_LAMBDA = 0.5
DEFAULT_RHO = 0.95


class LocalizationError(ValueError):
    pass


@dataclass
class LocalizationResult:
    chosen: list[str]
    covered_fraction: float
    union_node_count: int
    objective: float
    merged: HeterogeneousNetwork
    unknown_ids: list[str] = field(default_factory=list)

    def to_dict(self, include_network: bool = True) -> dict:
        out = {
            "chosen": self.chosen,
            "covered_fraction": self.covered_fraction,
            "union_node_count": self.union_node_count,
            "objective": self.objective,
            "unknown_ids": self.unknown_ids,
        }
        if include_network:
            out["network"] = {
                "nodes": [n.to_record() for n in self.merged.nodes],
                "edges": [e.to_record() for e in self.merged.edges],
            }
        return out


def greedy_localize(
    query_nodes: set[str],
    candidates: list[Cell],
    base: HeterogeneousNetwork,
    lam: float = DEFAULT_LAMBDA,
    rho: float = DEFAULT_RHO,
) -> LocalizationResult:
    """Greedy maximization of |Q ∩ union|/|Q| - lam * |union|/|base|.

    Each step adds the candidate with the largest marginal gain (ties by
    canonical coordinate string); stops at coverage >= rho or when no
    candidate has positive gain. The merged network carries every base edge
    inside the union.
    """
    known = {q for q in query_nodes if base.has_node(q)}
    unknown = sorted(query_nodes - known)
    if not known:
        raise LocalizationError("no query node ids exist in the base network")

    candidate_sets = [(c.coordinate_string, set(c.members)) for c in candidates]
    candidate_sets.sort(key=lambda kv: kv[0])
    if not any(known & members for _, members in candidate_sets):
        raise LocalizationError("no candidate cell covers any query node")

    base_n = base.node_count()
    q_n = len(known)
    union: set[str] = set()
    covered: set[str] = set()
    chosen: list[str] = []
    objective = 0.0
    remaining = list(candidate_sets)

    while remaining:
        if q_n and len(covered) / q_n >= rho:
            break
        best_gain = 0.0
        best_idx = -1
        for idx, (key, members) in enumerate(remaining):
            gain_cov = len((known & members) - covered) / q_n
            gain_size = lam * len(members - union) / base_n if base_n else 0.0
            gain = gain_cov - gain_size
            if gain > best_gain:
                best_gain = gain
                best_idx = idx
        if best_idx < 0:
            break
        key, members = remaining.pop(best_idx)
        chosen.append(key)
        union |= members
        covered |= known & members
        objective += best_gain

    merged = induced_subnetwork(base, union)
    return LocalizationResult(
        chosen=chosen,
        covered_fraction=len(covered) / q_n,
        union_node_count=len(union),
        objective=objective,
        merged=merged,
        unknown_ids=unknown,
    )
