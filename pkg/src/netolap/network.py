"""Typed heterogeneous network store with deterministic ingestion.

Nodes and edges are kept in canonical (id-sorted) order so that any two
networks built from the same logical content compare equal and serialize to
identical bytes. Numeric edge arrays back the fast paths (induced
subnetworks, projections) used by cell materialization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np


class IngestError(ValueError):
    """Raised for malformed input records; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _id_key(node_id: str) -> bytes:
    # ids are compared byte-wise, not by locale or codepoint conventions
    return node_id.encode("utf-8")


@dataclass(frozen=True)
class TypedNode:
    id: str
    node_type: str
    surface_name: str = ""
    attrs: Mapping[str, str] = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "type": self.node_type,
            "name": self.surface_name,
            "attrs": dict(sorted(self.attrs.items())),
        }


@dataclass(frozen=True)
class TypedEdge:
    src: str
    dst: str
    edge_type: str
    weight: float = 1.0

    def to_record(self) -> dict:
        return {
            "src": self.src,
            "dst": self.dst,
            "type": self.edge_type,
            "weight": self.weight,
        }


class HeterogeneousNetwork:
    """Immutable typed multigraph with id-indexed access.

    Parallel edges with the same (src, dst, edge_type) are merged at
    construction by summing weights. Node and edge sequences are stored in
    canonical order (byte-wise id order, then edge type).
    """

    def __init__(self, nodes: Iterable[TypedNode], edges: Iterable[TypedEdge]):
        node_list = sorted(nodes, key=lambda n: _id_key(n.id))
        self._nodes: list[TypedNode] = node_list
        self._index: dict[str, int] = {}
        for i, node in enumerate(node_list):
            if node.id in self._index:
                raise IngestError(f"duplicate node id {node.id!r}")
            if not node.node_type:
                raise IngestError(f"node {node.id!r} has empty type")
            self._index[node.id] = i

        merged: dict[tuple[str, str, str], float] = {}
        for e in edges:
            if e.src not in self._index:
                raise IngestError(f"edge references unknown node id {e.src!r}")
            if e.dst not in self._index:
                raise IngestError(f"edge references unknown node id {e.dst!r}")
            if e.weight < 0:
                raise IngestError(f"negative weight on edge ({e.src!r}, {e.dst!r})")
            key = (e.src, e.dst, e.edge_type)
            merged[key] = merged.get(key, 0.0) + e.weight

        keys = sorted(merged, key=lambda k: (_id_key(k[0]), _id_key(k[1]), k[2]))
        self._edges: list[TypedEdge] = [
            TypedEdge(src, dst, etype, merged[(src, dst, etype)]) for src, dst, etype in keys
        ]

        n_edges = len(self._edges)
        self._src_idx = np.fromiter(
            (self._index[e.src] for e in self._edges), dtype=np.int64, count=n_edges
        )
        self._dst_idx = np.fromiter(
            (self._index[e.dst] for e in self._edges), dtype=np.int64, count=n_edges
        )
        self._weights = np.fromiter((e.weight for e in self._edges), dtype=np.float64, count=n_edges)
        self._adjacency: dict[str, list[str]] | None = None

    # -- accessors ---------------------------------------------------------

    @property
    def nodes(self) -> list[TypedNode]:
        return self._nodes

    @property
    def edges(self) -> list[TypedEdge]:
        return self._edges

    def node_count(self) -> int:
        return len(self._nodes)

    def edge_count(self) -> int:
        return len(self._edges)

    def node_ids(self) -> list[str]:
        return [n.id for n in self._nodes]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._index

    def node(self, node_id: str) -> TypedNode:
        return self._nodes[self._index[node_id]]

    def node_index(self, node_id: str) -> int:
        return self._index[node_id]

    def node_types(self) -> set[str]:
        return {n.node_type for n in self._nodes}

    def edge_types(self) -> set[str]:
        return {e.edge_type for e in self._edges}

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(src_index, dst_index, weight) arrays aligned with `edges`."""
        return self._src_idx, self._dst_idx, self._weights

    @property
    def adjacency(self) -> dict[str, list[str]]:
        """Per-node sorted neighbor id lists (both directions, deduplicated)."""
        if self._adjacency is None:
            nbrs: dict[str, set[str]] = {n.id: set() for n in self._nodes}
            for e in self._edges:
                nbrs[e.src].add(e.dst)
                nbrs[e.dst].add(e.src)
            self._adjacency = {
                nid: sorted(s, key=_id_key) for nid, s in sorted(nbrs.items(), key=lambda kv: _id_key(kv[0]))
            }
        return self._adjacency

    def __iter__(self) -> Iterator[TypedNode]:
        return iter(self._nodes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HeterogeneousNetwork):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __repr__(self):
        return f"HeterogeneousNetwork(nodes={self.node_count()}, edges={self.edge_count()})"

    # -- serialization -----------------------------------------------------

    def to_jsonl(self) -> tuple[str, str]:
        """Canonical (nodes_jsonl, edges_jsonl) text for round-tripping."""
        nodes = "".join(json.dumps(n.to_record(), sort_keys=True) + "\n" for n in self._nodes)
        edges = "".join(json.dumps(e.to_record(), sort_keys=True) + "\n" for e in self._edges)
        return nodes, edges


class UndirectedGraph:
    """Simple undirected weighted graph over integer vertices 0..n-1.

    Backed by CSR-style sorted neighbor arrays; produced by
    `undirected_projection` and consumed by summaries, propagation, and
    embeddings. `ids[i]` maps vertex i back to the source network node id.
    """

    def __init__(self, ids: list[str], u: np.ndarray, v: np.ndarray, w: np.ndarray):
        self.ids = ids
        self.n = len(ids)
        order = np.lexsort((v, u))
        self.edge_u = u[order]
        self.edge_v = v[order]
        self.edge_w = w[order]
        # symmetric CSR with per-row sorted neighbors, built fully vectorized
        all_u = np.concatenate([self.edge_u, self.edge_v])
        all_v = np.concatenate([self.edge_v, self.edge_u])
        all_w = np.concatenate([self.edge_w, self.edge_w])
        order = np.lexsort((all_v, all_u))
        self.indices = all_v[order]
        self.weights = all_w[order]
        deg = np.bincount(all_u, minlength=self.n).astype(np.int64)
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(deg, out=self.indptr[1:])

    def edge_count(self) -> int:
        return len(self.edge_u)

    def degree(self, i: int) -> int:
        return int(self.indptr[i + 1] - self.indptr[i])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def csr_matrix(self):
        from scipy.sparse import csr_matrix

        return csr_matrix((self.weights, self.indices, self.indptr), shape=(self.n, self.n))

    def __repr__(self):
        return f"UndirectedGraph(n={self.n}, m={self.edge_count()})"


def _parse_jsonl(source: str | Iterable[str]):
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = source
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IngestError(f"invalid JSON ({exc.msg})", line=lineno) from exc
        if not isinstance(record, dict):
            raise IngestError("record is not an object", line=lineno)
        yield lineno, record


def ingest_network(nodes_source: str | Iterable[str], edges_source: str | Iterable[str]) -> HeterogeneousNetwork:
    """Build a network from JSON-lines node and edge sources.

    Node records: {"id", "type", "name", "attrs": {dim: value, ...}}.
    Edge records: {"src", "dst", "type", "weight"} with weight defaulting
    to 1.0. Duplicate (src, dst, type) edges merge by weight sum; load
    order never affects the result.
    """
    nodes = []
    seen: set[str] = set()
    for lineno, rec in _parse_jsonl(nodes_source):
        try:
            node_id = rec["id"]
            node_type = rec["type"]
        except KeyError as exc:
            raise IngestError(f"node record missing field {exc.args[0]!r}", line=lineno) from exc
        if not isinstance(node_id, str) or not node_id:
            raise IngestError("node id must be a non-empty string", line=lineno)
        if node_id in seen:
            raise IngestError(f"duplicate node id {node_id!r}", line=lineno)
        if not isinstance(node_type, str) or not node_type:
            raise IngestError(f"node {node_id!r} has empty type", line=lineno)
        attrs = rec.get("attrs") or {}
        if not isinstance(attrs, dict):
            raise IngestError(f"node {node_id!r} attrs must be an object", line=lineno)
        seen.add(node_id)
        nodes.append(TypedNode(node_id, node_type, rec.get("name", "") or "", dict(attrs)))

    node_ids = {n.id for n in nodes}
    edges = []
    for lineno, rec in _parse_jsonl(edges_source):
        try:
            src, dst, etype = rec["src"], rec["dst"], rec["type"]
        except KeyError as exc:
            raise IngestError(f"edge record missing field {exc.args[0]!r}", line=lineno) from exc
        weight = rec.get("weight", 1.0)
        if not isinstance(weight, (int, float)) or isinstance(weight, bool):
            raise IngestError("edge weight must be numeric", line=lineno)
        if weight < 0:
            raise IngestError(f"negative weight on edge ({src!r}, {dst!r})", line=lineno)
        if src not in node_ids:
            raise IngestError(f"edge references unknown node id {src!r}", line=lineno)
        if dst not in node_ids:
            raise IngestError(f"edge references unknown node id {dst!r}", line=lineno)
        edges.append(TypedEdge(src, dst, etype, float(weight)))

    return HeterogeneousNetwork(nodes, edges)


def induced_subnetwork(net: HeterogeneousNetwork, keep: Iterable[str]) -> HeterogeneousNetwork:
    """Subnetwork on `keep`: exactly those nodes plus all edges between them."""
    keep_set = set(keep)
    unknown = [k for k in keep_set if not net.has_node(k)]
    if unknown:
        raise KeyError(f"unknown node ids: {sorted(unknown)[:5]!r}")
    if len(keep_set) == net.node_count():
        return net
    keep_mask = np.zeros(net.node_count(), dtype=bool)
    for k in keep_set:
        keep_mask[net.node_index(k)] = True
    src, dst, _ = net.edge_arrays()
    edge_mask = keep_mask[src] & keep_mask[dst]
    nodes = [net.nodes[i] for i in np.flatnonzero(keep_mask)]
    edges = [net.edges[i] for i in np.flatnonzero(edge_mask)]
    return HeterogeneousNetwork(nodes, edges)


def undirected_projection(net: HeterogeneousNetwork) -> UndirectedGraph:
    """Collapse edge types and direction into a simple weighted graph.

    (u, v) and (v, u) merge by weight sum across all edge types;
    self-loops are dropped.
    """
    ids = net.node_ids()
    src, dst, w = net.edge_arrays()
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    not_loop = lo != hi
    lo, hi, w = lo[not_loop], hi[not_loop], w[not_loop]
    if len(lo) == 0:
        empty = np.empty(0, dtype=np.int64)
        return UndirectedGraph(ids, empty, empty, np.empty(0, dtype=np.float64))
    packed = lo * np.int64(net.node_count()) + hi
    uniq, inverse = np.unique(packed, return_inverse=True)
    sums = np.zeros(len(uniq), dtype=np.float64)
    np.add.at(sums, inverse, w)
    u = (uniq // net.node_count()).astype(np.int64)
    v = (uniq % net.node_count()).astype(np.int64)
    return UndirectedGraph(ids, u, v, sums)
