"""The cube engine: one immutable base network, taxonomies, allocation, and
demand-driven caches for cells, summaries, embeddings, and alignments."""

from __future__ import annotations

import itertools

from .allocation import Allocation, allocate
from .backtrack import CellHit, NetworkQuery, topk_backtrack
from .config import DEFAULTS, BuildConfig
from .localization import LocalizationResult, greedy_localize
from .network import HeterogeneousNetwork, ingest_network
from .olap import (
    AggregatedGraph,
    Cell,
    ContrastTable,
    NetworkSummary,
    build_contrast_table,
    drilldown,
    materialize_cell,
    rollup,
    summarize_cell,
)
from .patterns import (
    LabeledGraph,
    ScoredPattern,
    mine_closed_patterns,
    rank_patterns,
    score_pattern,
)
from .proximity import (
    AlignmentTransform,
    CellEmbedding,
    EmbeddingError,
    InsufficientAnchorsError,
    align_cells,
    cosine_similarity,
    embed_cell,
    topk_neighbors,
)
from .taxonomy import ROOT_ID, CellCoordinate, CoordinateError, CubeLattice, Taxonomy, load_taxonomy


class CubeEngine:
    """Read-side facade over a built cube.

    All caches are deterministic functions of the immutable inputs, so
    concurrent insertion is last-writer-wins safe.
    """

    def __init__(
        self,
        base: HeterogeneousNetwork,
        lattice: CubeLattice,
        allocation: Allocation,
        params: dict | None = None,
    ):
        self.base = base
        self.lattice = lattice
        self.allocation = allocation
        self.params = dict(DEFAULTS)
        if params:
            self.params.update(params)
        self._cells: dict[str, Cell] = {}
        self._summaries: dict[str, NetworkSummary] = {}
        self._embeddings: dict[str, CellEmbedding] = {}
        self._alignments: dict[tuple[str, str], AlignmentTransform] = {}
        self._labeled: dict[str, LabeledGraph] = {}

    # -- construction --------------------------------------------------------

    @classmethod
    def build(cls, config: BuildConfig) -> "CubeEngine":
        base = ingest_network(
            config.nodes_path.read_text(encoding="utf-8"),
            config.edges_path.read_text(encoding="utf-8"),
        )
        taxonomies = [
            load_taxonomy(path.read_text(encoding="utf-8"), dim)
            for dim, path in config.dimension_files.items()
        ]
        lattice = CubeLattice(taxonomies)
        allocation = allocate(
            base,
            lattice,
            alpha=config.param("alpha"),
            iters=config.param("iters"),
            tau=config.param("tau"),
        )
        engine = cls(base, lattice, allocation, params=config.to_dict())
        engine.precompute(config.param("precompute"))
        return engine

    def precompute(self, targets=("summaries",)):
        if not targets:
            return
        for coord in self.leaf_coordinates():
            cell = self.cell(coord)
            if cell.is_empty():
                continue
            if "summaries" in targets:
                self.summary(coord)
            if "embeddings" in targets:
                try:
                    self.embedding(coord)
                except EmbeddingError:
                    continue

    # -- coordinates and cells ------------------------------------------------

    def parse_coordinate(self, text: str) -> CellCoordinate:
        return self.lattice.parse_coordinate(text)

    def coordinate_string(self, coord: CellCoordinate) -> str:
        return self.lattice.canonical_string(coord)

    def leaf_coordinates(self) -> list[CellCoordinate]:
        leaf_sets = [tax.leaves() for tax in self.lattice.dimensions]
        return [CellCoordinate(tuple(c)) for c in itertools.product(*leaf_sets)]

    def cell(self, coord: CellCoordinate) -> Cell:
        key = self.lattice.canonical_string(coord)
        cached = self._cells.get(key)
        if cached is None:
            cached = materialize_cell(coord, self.allocation, self.lattice, self.base)
            self._cells[key] = cached
        return cached

    def cell_by_string(self, text: str) -> Cell:
        return self.cell(self.parse_coordinate(text))

    # -- summaries and contrast -----------------------------------------------

    def summary(self, coord: CellCoordinate) -> NetworkSummary:
        key = self.lattice.canonical_string(coord)
        cached = self._summaries.get(key)
        if cached is None:
            cached = summarize_cell(
                self.cell(coord), cpl_sample_seed=self.params["cpl_sample_seed"]
            )
            self._summaries[key] = cached
        return cached

    def contrast(self, fixed: CellCoordinate, dimension: str, level: int) -> ContrastTable:
        tax = self.lattice.taxonomy(dimension)
        d = self.lattice.dim_index(dimension)
        fixed_value = fixed[d]
        if tax.is_leaf(fixed_value) and fixed_value != ROOT_ID:
            raise CoordinateError(
                f"dimension {dimension!r} is fixed to leaf {fixed_value!r}; nothing to contrast"
            )
        if level <= tax.depth(fixed_value):
            raise CoordinateError(
                f"contrast level {level} does not refine {fixed_value!r} "
                f"(depth {tax.depth(fixed_value)})"
            )
        if level > tax.max_depth:
            raise CoordinateError(
                f"level {level} exceeds depth {tax.max_depth} of dimension {dimension!r}"
            )
        entries = []
        empty = []
        for value in tax.values_at_level(level, under=fixed_value):
            coord = CellCoordinate(fixed[:d] + (value,) + fixed[d + 1 :])
            cell = self.cell(coord)
            if cell.is_empty():
                empty.append(value)
                continue
            entries.append((value, cell.coordinate_string, self.summary(coord)))
        return build_contrast_table(
            self.lattice.canonical_string(fixed), dimension, level, entries, empty
        )

    # -- roll-up / drill-down ---------------------------------------------------

    def _dim_values_for(self, net: HeterogeneousNetwork, dimension: str) -> dict[str, str]:
        assign = self.allocation.dimensions[dimension]
        index = {nid: i for i, nid in enumerate(self.allocation.node_ids)}
        return {node.id: assign.values[index[node.id]] for node in net.nodes}

    def rollup(
        self, dimension: str, level: int, coord: CellCoordinate | None = None
    ) -> AggregatedGraph:
        net = self.base if coord is None else self.cell(coord).subnetwork
        return rollup(net, self._dim_values_for(net, dimension), self.lattice, dimension, level)

    def drilldown(
        self, dimension: str, level: int, super_node: str, coord: CellCoordinate | None = None
    ) -> HeterogeneousNetwork:
        agg = self.rollup(dimension, level, coord)
        net = self.base if coord is None else self.cell(coord).subnetwork
        return drilldown(agg, super_node, net)

    # -- backtracking -----------------------------------------------------------

    def backtrack(self, query: NetworkQuery, k: int, gamma: float | None = None) -> list[CellHit]:
        return topk_backtrack(
            query,
            k,
            self.lattice,
            self.cell,
            gamma=self.params["gamma"] if gamma is None else gamma,
        )

    # -- pattern mining -----------------------------------------------------------

    def _labeled_graph(self, coord: CellCoordinate) -> LabeledGraph:
        key = self.lattice.canonical_string(coord)
        cached = self._labeled.get(key)
        if cached is None:
            cached = LabeledGraph.from_network(self.cell(coord).subnetwork)
            self._labeled[key] = cached
        return cached

    def sibling_coordinates(
        self, coord: CellCoordinate, dimension: str | None = None
    ) -> tuple[str | None, list[CellCoordinate]]:
        """Same-parent coordinates along one dimension, the cell included.

        Defaults to the last dimension with a non-root value; the top cell
        is its own only sibling.
        """
        if dimension is None:
            for i in range(len(coord) - 1, -1, -1):
                if coord[i] != ROOT_ID:
                    dimension = self.lattice.dim_names[i]
                    break
        if dimension is None:
            return None, [coord]
        d = self.lattice.dim_index(dimension)
        tax = self.lattice.taxonomy(dimension)
        value = coord[d]
        parent = tax.parent(value)
        if parent is None:
            return dimension, [coord]
        siblings = tax.children(parent)
        return dimension, [
            CellCoordinate(coord[:d] + (v,) + coord[d + 1 :]) for v in siblings
        ]

    def mine(
        self,
        coord: CellCoordinate,
        min_support: int | None = None,
        max_edges: int | None = None,
        weights: tuple[float, float, float] | None = None,
        contrast_dim: str | None = None,
    ) -> list[ScoredPattern]:
        min_support = self.params["min_support"] if min_support is None else min_support
        max_edges = self.params["max_edges"] if max_edges is None else max_edges
        weights = tuple(self.params["weights"]) if weights is None else tuple(weights)
        cell = self.cell(coord)
        mined = mine_closed_patterns(cell.subnetwork, min_support, max_edges)
        cell_key = cell.coordinate_string
        _, sib_coords = self.sibling_coordinates(coord, contrast_dim)
        sibling_graphs = [
            (self.lattice.canonical_string(c), self._labeled_graph(c)) for c in sib_coords
        ]
        cell_graph = self._labeled_graph(coord)
        scored = [
            score_pattern(
                p, supp, cell_graph, sibling_graphs, weights=weights, cell_key=cell_key
            )
            for p, supp in mined
        ]
        return rank_patterns(scored)

    # -- localization ---------------------------------------------------------------

    def candidate_cells(self, level: int) -> list[Cell]:
        """Non-empty cells with every dimension cut at `level`, plus their parents."""
        frontiers = [tax.values_at_level(level) for tax in self.lattice.dimensions]
        seen: dict[str, Cell] = {}
        for combo in itertools.product(*frontiers):
            cell = self.cell(CellCoordinate(tuple(combo)))
            if not cell.is_empty():
                seen[cell.coordinate_string] = cell
        for cell in list(seen.values()):
            for parent in self.lattice.parent_coordinates(cell.coordinate):
                p_cell = self.cell(parent)
                if not p_cell.is_empty():
                    seen.setdefault(p_cell.coordinate_string, p_cell)
        return [seen[k] for k in sorted(seen)]

    def localize(
        self,
        nodes: set[str],
        lam: float | None = None,
        rho: float | None = None,
        level: int = 1,
    ) -> LocalizationResult:
        return greedy_localize(
            nodes,
            self.candidate_cells(level),
            self.base,
            lam=self.params["lambda"] if lam is None else lam,
            rho=self.params["rho"] if rho is None else rho,
        )

    # -- embeddings and proximity ------------------------------------------------------

    def embedding(self, coord: CellCoordinate, dim: int | None = None) -> CellEmbedding:
        requested = self.params["embed_dim"] if dim is None else dim
        key = self.lattice.canonical_string(coord)
        cached = self._embeddings.get(key)
        if cached is None or cached.requested_dim != requested:
            cached = embed_cell(self.cell(coord), dim=requested)
            self._embeddings[key] = cached
        return cached

    def alignment(self, src: CellCoordinate, dst: CellCoordinate) -> AlignmentTransform:
        key = (self.lattice.canonical_string(src), self.lattice.canonical_string(dst))
        cached = self._alignments.get(key)
        if cached is None:
            cached = align_cells(self.embedding(src), self.embedding(dst))
            self._alignments[key] = cached
        return cached

    def _lca_coordinate(self, a: CellCoordinate, b: CellCoordinate) -> CellCoordinate:
        values = []
        for tax, va, vb in zip(self.lattice.dimensions, a, b):
            chain_a = tax.ancestors(va)
            chain_b = set(tax.ancestors(vb))
            values.append(next(v for v in chain_a if v in chain_b))
        return CellCoordinate(tuple(values))

    def _vector_in(self, node_id: str, coord: CellCoordinate):
        """Vector for a node in a cell's space, transferring across aligned
        cells (directly, else via the lowest common ancestor cell)."""
        target = self.embedding(coord)
        if target.has_vector(node_id):
            return target.vector(node_id), [target.coordinate]
        for key in sorted(self._embeddings):
            src = self._embeddings[key]
            if key == target.coordinate or not src.has_vector(node_id):
                continue
            src_coord = self.parse_coordinate(key)
            vec = src.vector(node_id)
            try:
                transform = self.alignment(src_coord, coord)
                return transform.apply(vec), [key, target.coordinate]
            except InsufficientAnchorsError:
                pass
            try:
                lca = self._lca_coordinate(src_coord, coord)
                lca_key = self.lattice.canonical_string(lca)
                if lca_key in (key, target.coordinate):
                    continue
                step1 = self.alignment(src_coord, lca)
                step2 = self.alignment(lca, coord)
                return step2.apply(step1.apply(vec)), [key, lca_key, target.coordinate]
            except (InsufficientAnchorsError, EmbeddingError):
                continue
        raise EmbeddingError(
            f"node {node_id!r} is not reachable in any cell aligned to "
            f"{target.coordinate!r}"
        )

    def conditional_proximity(self, u: str, v: str, coord: CellCoordinate) -> dict:
        vec_u, path_u = self._vector_in(u, coord)
        vec_v, path_v = self._vector_in(v, coord)
        return {
            "proximity": cosine_similarity(vec_u, vec_v),
            "transfer_paths": {"u": path_u, "v": path_v},
        }

    def topk_neighbors(self, coord: CellCoordinate, node_id: str, k: int) -> list[tuple[str, float]]:
        return topk_neighbors(self.embedding(coord), node_id, k)

    # -- misc ------------------------------------------------------------------

    def dimension_trees(self) -> dict[str, dict]:
        return {tax.dimension_name: tax.to_dict() for tax in self.lattice.dimensions}

    def taxonomy(self, dimension: str) -> Taxonomy:
        return self.lattice.taxonomy(dimension)
