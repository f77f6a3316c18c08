"""Request handlers over a CubeEngine.

Both the HTTP routes and the CLI call these, so the two surfaces emit
identical JSON documents for identical logical requests.
"""

from __future__ import annotations

from ..backtrack import NetworkQuery
from ..engine import CubeEngine
from .schemas import (
    BacktrackRequest,
    BacktrackResponse,
    ContrastResponse,
    DimensionsResponse,
    DimensionTree,
    DrilldownResponse,
    EmbeddingResponse,
    LocalizeRequest,
    LocalizeResponse,
    NetworkPayload,
    PatternsResponse,
    ProxNeighborsResponse,
    ProxPairResponse,
    RollupResponse,
    SummaryResponse,
)


def parse_weights(text: str | None, default) -> tuple[float, float, float]:
    if text is None:
        return tuple(default)
    parts = [p for p in text.split(",") if p.strip() != ""]
    if len(parts) != 3:
        raise ValueError(f"weights must be three comma-separated numbers, got {text!r}")
    return tuple(float(p) for p in parts)


def _network_payload(net) -> NetworkPayload:
    return NetworkPayload(
        nodes=[n.to_record() for n in net.nodes],
        edges=[e.to_record() for e in net.edges],
    )


class EngineHandlers:
    def __init__(self, engine: CubeEngine):
        self.engine = engine

    def dimensions(self) -> DimensionsResponse:
        trees = self.engine.dimension_trees()
        return DimensionsResponse(
            dimensions=[
                DimensionTree(name=name, tree=trees[name])
                for name in self.engine.lattice.dim_names
            ]
        )

    def cell_summary(self, coord_text: str) -> SummaryResponse:
        coord = self.engine.parse_coordinate(coord_text)
        cell = self.engine.cell(coord)
        return SummaryResponse(
            coordinate=self.engine.coordinate_string(coord),
            member_count=len(cell.members),
            summary=self.engine.summary(coord).to_dict(),
        )

    def cell_patterns(
        self,
        coord_text: str,
        min_support: int | None = None,
        max_edges: int | None = None,
        weights: str | None = None,
        contrast_dim: str | None = None,
    ) -> PatternsResponse:
        coord = self.engine.parse_coordinate(coord_text)
        w = parse_weights(weights, self.engine.params["weights"])
        eff_min = self.engine.params["min_support"] if min_support is None else min_support
        eff_max = self.engine.params["max_edges"] if max_edges is None else max_edges
        ranked = self.engine.mine(
            coord, min_support=eff_min, max_edges=eff_max, weights=w, contrast_dim=contrast_dim
        )
        dim, _ = self.engine.sibling_coordinates(coord, contrast_dim)
        return PatternsResponse(
            coordinate=self.engine.coordinate_string(coord),
            min_support=eff_min,
            max_edges=eff_max,
            weights={"popularity": w[0], "integrity": w[1], "distinctiveness": w[2]},
            contrast_dimension=dim,
            patterns=[s.to_dict() for s in ranked],
        )

    def cell_prox(self, coord_text: str, node: str, k: int = 10, other: str | None = None):
        coord = self.engine.parse_coordinate(coord_text)
        if other is not None:
            result = self.engine.conditional_proximity(node, other, coord)
            return ProxPairResponse(
                coordinate=self.engine.coordinate_string(coord),
                node=node,
                other=other,
                proximity=result["proximity"],
                transfer_paths=result["transfer_paths"],
            )
        neighbors = self.engine.topk_neighbors(coord, node, k)
        return ProxNeighborsResponse(
            coordinate=self.engine.coordinate_string(coord),
            node=node,
            k=k,
            dim=self.engine.embedding(coord).dim,
            neighbors=[{"node": n, "proximity": p} for n, p in neighbors],
        )

    def rollup(
        self, dimension: str, level: int, coord_text: str = "", include_members: bool = True
    ) -> RollupResponse:
        coord = self.engine.parse_coordinate(coord_text)
        agg = self.engine.rollup(dimension, level, coord)
        return RollupResponse(
            coordinate=self.engine.coordinate_string(coord),
            aggregate=agg.to_dict(include_members=include_members),
        )

    def drilldown(
        self, dimension: str, level: int, super_node: str, coord_text: str = ""
    ) -> DrilldownResponse:
        coord = self.engine.parse_coordinate(coord_text)
        net = self.engine.drilldown(dimension, level, super_node, coord)
        return DrilldownResponse(
            coordinate=self.engine.coordinate_string(coord),
            dimension=dimension,
            level=level,
            super_node=super_node,
            network=_network_payload(net),
        )

    def embed(self, coord_text: str, dim: int | None = None) -> EmbeddingResponse:
        coord = self.engine.parse_coordinate(coord_text)
        emb = self.engine.embedding(coord, dim=dim)
        return EmbeddingResponse(
            coordinate=self.engine.coordinate_string(coord),
            dim=emb.dim,
            requested_dim=emb.requested_dim,
            embedded_count=len(emb.embedded_ids()),
            eigenvalues=[float(v) for v in emb.eigenvalues],
            residual=emb.residual,
            solver_seed=emb.solver_seed,
            tolerance=emb.tolerance,
        )

    def backtrack(self, request: BacktrackRequest) -> BacktrackResponse:
        query = NetworkQuery.from_parts(request.nodes, request.edges)
        gamma = self.engine.params["gamma"] if request.gamma is None else request.gamma
        hits = self.engine.backtrack(query, request.k, gamma=gamma)
        return BacktrackResponse(
            query=query.to_dict(),
            k=request.k,
            gamma=gamma,
            hits=[h.to_dict() for h in hits],
        )

    def localize(self, request: LocalizeRequest) -> LocalizeResponse:
        lam = self.engine.params["lambda"] if request.lam is None else request.lam
        rho = self.engine.params["rho"] if request.rho is None else request.rho
        result = self.engine.localize(set(request.nodes), lam=lam, rho=rho, level=request.level)
        return LocalizeResponse(
            lam=lam,
            rho=rho,
            level=request.level,
            chosen=result.chosen,
            covered_fraction=result.covered_fraction,
            union_node_count=result.union_node_count,
            objective=result.objective,
            unknown_ids=result.unknown_ids,
            network=_network_payload(result.merged),
        )

    def contrast(self, fixed_text: str, dimension: str, level: int) -> ContrastResponse:
        fixed = self.engine.parse_coordinate(fixed_text)
        table = self.engine.contrast(fixed, dimension, level)
        return ContrastResponse(**table.to_dict())
