"""Request/response models shared by the HTTP API and the CLI."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class DimensionTree(BaseModel):
    name: str
    tree: dict


class DimensionsResponse(BaseModel):
    dimensions: list[DimensionTree]


class SummaryResponse(BaseModel):
    coordinate: str
    member_count: int
    summary: dict


class PatternsResponse(BaseModel):
    coordinate: str
    min_support: int
    max_edges: int
    weights: dict
    contrast_dimension: str | None
    patterns: list[dict]


class ProxNeighborsResponse(BaseModel):
    coordinate: str
    node: str
    k: int
    dim: int
    neighbors: list[dict]


class ProxPairResponse(BaseModel):
    coordinate: str
    node: str
    other: str
    proximity: float
    transfer_paths: dict


class RollupResponse(BaseModel):
    coordinate: str
    aggregate: dict


class NetworkPayload(BaseModel):
    nodes: list[dict]
    edges: list[dict]


class DrilldownResponse(BaseModel):
    coordinate: str
    dimension: str
    level: int
    super_node: str
    network: NetworkPayload


class EmbeddingResponse(BaseModel):
    coordinate: str
    dim: int
    requested_dim: int
    embedded_count: int
    eigenvalues: list[float]
    residual: float
    solver_seed: int
    tolerance: float


class BacktrackRequest(BaseModel):
    nodes: list[str]
    edges: list[tuple[str, str]] = []
    k: int = 5
    gamma: float | None = None


class BacktrackResponse(BaseModel):
    query: dict
    k: int
    gamma: float
    hits: list[dict]


class LocalizeRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    nodes: list[str]
    lam: float | None = Field(default=None, alias="lambda")
    rho: float | None = None
    level: int = 1


class LocalizeResponse(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(alias="lambda")
    rho: float
    level: int
    chosen: list[str]
    covered_fraction: float
    union_node_count: int
    objective: float
    unknown_ids: list[str]
    network: NetworkPayload


class ContrastResponse(BaseModel):
    fixed: str
    dimension: str
    level: int
    cells: list[dict]
    statistics: dict
    empty_siblings: list[str]


class ErrorResponse(BaseModel):
    code: str
    message: str
