"""Per-cell spectral embeddings, orthogonal alignment, and proximity math.

Each cell's largest component is embedded with the top eigenvectors of its
symmetric normalized adjacency; cells are aligned over shared anchor nodes
with the orthogonal Procrustes solution, so vectors can be transferred
between related cells for conditional proximity search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph, csr_matrix
from scipy.sparse.linalg import eigsh

from .network import UndirectedGraph, undirected_projection
from .olap import Cell

DEFAULT_EMBED_DIM = 32
EIGEN_TOLERANCE = 1e-8
DENSE_EIGEN_LIMIT = 500
SOLVER_SEED = 7


class EmbeddingError(ValueError):
    pass


class InsufficientAnchorsError(ValueError):
    """Too few shared in-component nodes; route via the lowest common ancestor cell."""


@dataclass
class CellEmbedding:
    coordinate: str
    dim: int
    requested_dim: int
    node_ids: list[str]
    vectors: np.ndarray
    in_component: np.ndarray
    eigenvalues: np.ndarray
    solver_seed: int
    tolerance: float
    residual: float

    def __post_init__(self):
        self._pos = {nid: i for i, nid in enumerate(self.node_ids)}

    def has_vector(self, node_id: str) -> bool:
        i = self._pos.get(node_id)
        return i is not None and bool(self.in_component[i])

    def vector(self, node_id: str) -> np.ndarray:
        i = self._pos.get(node_id)
        if i is None or not self.in_component[i]:
            raise EmbeddingError(
                f"node {node_id!r} has no embedding vector in cell {self.coordinate!r}"
            )
        return self.vectors[i]

    def embedded_ids(self) -> list[str]:
        return [nid for nid, ok in zip(self.node_ids, self.in_component) if ok]

    def to_dict(self) -> dict:
        return {
            "coordinate": self.coordinate,
            "dim": self.dim,
            "requested_dim": self.requested_dim,
            "node_ids": self.node_ids,
            "vectors": [[float(x) for x in row] for row in self.vectors],
            "in_component": [bool(b) for b in self.in_component],
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "solver_seed": self.solver_seed,
            "tolerance": self.tolerance,
            "residual": self.residual,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CellEmbedding":
        return cls(
            coordinate=d["coordinate"],
            dim=d["dim"],
            requested_dim=d["requested_dim"],
            node_ids=list(d["node_ids"]),
            vectors=np.asarray(d["vectors"], dtype=np.float64).reshape(
                len(d["node_ids"]), d["dim"]
            ),
            in_component=np.asarray(d["in_component"], dtype=bool),
            eigenvalues=np.asarray(d["eigenvalues"], dtype=np.float64),
            solver_seed=d["solver_seed"],
            tolerance=d["tolerance"],
            residual=d["residual"],
        )


@dataclass
class AlignmentTransform:
    source: str
    target: str
    matrix: np.ndarray
    anchor_count: int
    residual: float

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return vec @ self.matrix

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "anchor_count": self.anchor_count,
            "residual": self.residual,
        }


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each eigenvector so its largest-magnitude entry is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        i = int(np.argmax(np.abs(col)))
        if col[i] < 0:
            out[:, j] = -col
    return out


def _sym_normalized(graph: UndirectedGraph, component: np.ndarray) -> csr_matrix:
    sub = graph.csr_matrix()[component][:, component]
    deg = np.asarray(sub.sum(axis=1)).ravel()
    inv_sqrt = np.zeros_like(deg)
    positive = deg > 0
    inv_sqrt[positive] = 1.0 / np.sqrt(deg[positive])
    scale = csr_matrix(
        (inv_sqrt, (np.arange(len(deg)), np.arange(len(deg)))), shape=sub.shape
    )
    return scale @ sub @ scale


def embed_cell(
    cell: Cell,
    dim: int = DEFAULT_EMBED_DIM,
    solver_seed: int = SOLVER_SEED,
    tolerance: float = EIGEN_TOLERANCE,
) -> CellEmbedding:
    """Top-d eigenpairs of D^{-1/2} A D^{-1/2} on the largest component.

    The requested dimension is lowered to component size - 1 when necessary;
    nodes outside the component receive zero vectors and are flagged.
    """
    if cell.is_empty():
        raise EmbeddingError(f"cell {cell.coordinate_string!r} is empty")
    graph = undirected_projection(cell.subnetwork)
    if graph.n == 0 or graph.edge_count() == 0:
        raise EmbeddingError(
            f"cell {cell.coordinate_string!r} has no edges; nothing to embed"
        )
    _, labels = csgraph.connected_components(graph.csr_matrix(), directed=False)
    sizes = np.bincount(labels)
    component = np.flatnonzero(labels == int(np.argmax(sizes)))
    if len(component) < 2:
        raise EmbeddingError(
            f"largest component of cell {cell.coordinate_string!r} is a single node"
        )
    d_eff = min(dim, len(component) - 1)

    a_sym = _sym_normalized(graph, component)
    m = len(component)
    if m <= DENSE_EIGEN_LIMIT or d_eff >= m - 1:
        dense = a_sym.toarray()
        eigvals, eigvecs = np.linalg.eigh(dense)
        order = np.argsort(eigvals)[::-1][:d_eff]
        values = eigvals[order]
        vectors = eigvecs[:, order]
    else:
        rng = np.random.default_rng(solver_seed)
        v0 = rng.standard_normal(m)
        values, vectors = eigsh(a_sym, k=d_eff, which="LA", v0=v0, tol=tolerance * 1e-1)
        order = np.argsort(values)[::-1]
        values = values[order]
        vectors = vectors[:, order]
    vectors = _canonical_signs(vectors)

    residual = 0.0
    for j in range(d_eff):
        r = a_sym @ vectors[:, j] - values[j] * vectors[:, j]
        residual = max(residual, float(np.linalg.norm(r)))

    full = np.zeros((graph.n, d_eff), dtype=np.float64)
    full[component] = vectors
    in_component = np.zeros(graph.n, dtype=bool)
    in_component[component] = True
    return CellEmbedding(
        coordinate=cell.coordinate_string,
        dim=d_eff,
        requested_dim=dim,
        node_ids=list(graph.ids),
        vectors=full,
        in_component=in_component,
        eigenvalues=np.asarray(values, dtype=np.float64),
        solver_seed=solver_seed,
        tolerance=tolerance,
        residual=residual,
    )


def shared_anchors(src: CellEmbedding, dst: CellEmbedding) -> list[str]:
    src_ok = {nid for nid, ok in zip(src.node_ids, src.in_component) if ok}
    return sorted(nid for nid in dst.embedded_ids() if nid in src_ok)


def align_cells(src: CellEmbedding, dst: CellEmbedding) -> AlignmentTransform:
    """Orthogonal Procrustes fit over the shared anchor nodes."""
    if src.dim != dst.dim:
        raise EmbeddingError(
            f"dimension mismatch: {src.coordinate!r} is {src.dim}-d, "
            f"{dst.coordinate!r} is {dst.dim}-d"
        )
    anchors = shared_anchors(src, dst)
    needed = max(src.dim, 10)
    if len(anchors) < needed:
        raise InsufficientAnchorsError(
            f"{len(anchors)} shared nodes between {src.coordinate!r} and "
            f"{dst.coordinate!r}, need {needed}; route via the lowest common ancestor cell"
        )
    x = np.stack([src.vector(a) for a in anchors])
    y = np.stack([dst.vector(a) for a in anchors])
    u, _, vt = np.linalg.svd(x.T @ y)
    w = u @ vt
    residual = float(np.linalg.norm(x @ w - y))
    return AlignmentTransform(
        source=src.coordinate,
        target=dst.coordinate,
        matrix=w,
        anchor_count=len(anchors),
        residual=residual,
    )


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise EmbeddingError("cosine similarity undefined for a zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def topk_neighbors(embedding: CellEmbedding, node_id: str, k: int) -> list[tuple[str, float]]:
    """Exact linear scan over the cell's embedded nodes; ties by node id."""
    if k < 1:
        raise EmbeddingError(f"k must be at least 1, got {k}")
    anchor = embedding.vector(node_id)
    scored = []
    for other in embedding.embedded_ids():
        if other == node_id:
            continue
        scored.append((other, cosine_similarity(anchor, embedding.vector(other))))
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]
