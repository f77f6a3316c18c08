"""netolap: OLAP-style analysis and mining over taxonomy-organized networks."""

from .allocation import Allocation, allocate, propagate_labels, seed_by_surface_match
from .backtrack import CellHit, NetworkQuery, score_cell, topk_backtrack
from .engine import CubeEngine
from .generator import GeneratorConfig, generate_synthetic
from .localization import LocalizationResult, greedy_localize
from .network import (
    HeterogeneousNetwork,
    TypedEdge,
    TypedNode,
    induced_subnetwork,
    ingest_network,
    undirected_projection,
)
from .olap import (
    AggregatedGraph,
    Cell,
    NetworkSummary,
    materialize_cell,
    rollup,
    summarize_cell,
    summarize_network,
)
from .patterns import PatternGraph, ScoredPattern, mine_closed_patterns, mni_support
from .proximity import CellEmbedding, align_cells, embed_cell, topk_neighbors
from .snapshot import load_snapshot, save_snapshot
from .taxonomy import CellCoordinate, CubeLattice, Taxonomy, load_taxonomy

__version__ = "0.1.0"
