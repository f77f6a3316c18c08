import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from netolap.config import load_build_config
from netolap.engine import CubeEngine
from netolap.generator import DimensionSpec, GeneratorConfig, generate_synthetic
from netolap.network import HeterogeneousNetwork, TypedEdge, TypedNode
from netolap.taxonomy import CubeLattice, load_taxonomy


def make_network(nodes, edges=()):
    """nodes: (id, type[, name[, attrs]]) tuples; edges: (src, dst, type[, w])."""
    typed_nodes = []
    for spec in nodes:
        nid, ntype = spec[0], spec[1]
        name = spec[2] if len(spec) > 2 else nid
        attrs = spec[3] if len(spec) > 3 else {}
        typed_nodes.append(TypedNode(nid, ntype, name, attrs))
    typed_edges = []
    for spec in edges:
        src, dst, etype = spec[0], spec[1], spec[2] if len(spec) > 2 else "link"
        w = spec[3] if len(spec) > 3 else 1.0
        typed_edges.append(TypedEdge(src, dst, etype, w))
    return HeterogeneousNetwork(typed_nodes, typed_edges)


def simple_lattice(trees):
    """trees: {dim_name: tree_dict_or_json}."""
    return CubeLattice([load_taxonomy(t, dim) for dim, t in trees.items()])


def random_gnp_network(n, p, rng):
    nodes = [(f"v{i:03d}", "t") for i in range(n)]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((f"v{i:03d}", f"v{j:03d}", "link"))
    return make_network(nodes, edges), {
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if (f"v{i:03d}", f"v{j:03d}", "link") in edges
    }


CUBE42_CONFIG = GeneratorConfig(
    seed=42,
    dimensions=[
        DimensionSpec("topic", [2, 4]),
        DimensionSpec("year", [4], ordered=True),
    ],
    nodes_per_cell=30,
    p_intra=0.25,
    p_inter=0.002,
    node_types={"author": 0.45, "paper": 0.45, "venue": 0.1},
    seeds_per_cell=5,
    build_params={"alpha": 0.95, "tau": 0.2},
)

BLOCK7_CONFIG = GeneratorConfig(
    seed=7,
    dimensions=[DimensionSpec("block", [2])],
    nodes_per_cell=50,
    p_intra=0.2,
    p_inter=0.02,
    node_types={"entity": 1.0},
    seeds_per_cell=5,
    # unseeded mass decays by alpha per hop, so a high alpha keeps typical
    # leaf scores well clear of the assignment threshold
    build_params={"alpha": 0.95, "tau": 0.2},
)

LOCALIZE_CONFIG = GeneratorConfig(
    seed=11,
    dimensions=[DimensionSpec("sector", [8])],
    nodes_per_cell=40,
    p_intra=0.25,
    p_inter=0.005,
    node_types={"entity": 1.0},
    seeds_per_cell=5,
    build_params={"alpha": 0.95, "tau": 0.2},
)


def build_dataset(config: GeneratorConfig, directory: Path):
    data = generate_synthetic(config)
    data.write(directory)
    return data


def build_engine(directory: Path) -> CubeEngine:
    return CubeEngine.build(load_build_config(directory / "cube.conf"))


@pytest.fixture(scope="session")
def cube42(tmp_path_factory):
    directory = tmp_path_factory.mktemp("cube42")
    data = build_dataset(CUBE42_CONFIG, directory)
    engine = build_engine(directory)
    return {"dir": directory, "data": data, "engine": engine}


@pytest.fixture(scope="session")
def block7(tmp_path_factory):
    directory = tmp_path_factory.mktemp("block7")
    data = build_dataset(BLOCK7_CONFIG, directory)
    engine = build_engine(directory)
    return {"dir": directory, "data": data, "engine": engine}


@pytest.fixture(scope="session")
def localize_cube(tmp_path_factory):
    directory = tmp_path_factory.mktemp("localize")
    data = build_dataset(LOCALIZE_CONFIG, directory)
    engine = build_engine(directory)
    return {"dir": directory, "data": data, "engine": engine}


@pytest.fixture(scope="session")
def acceptance_log(request):
    records = []
    request.config._acceptance_records = records
    return records


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    records = getattr(config, "_acceptance_records", None)
    if not records:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("ACCEPTANCE CRITERIA " + "=" * 52)
    for name, status, detail in records:
        terminalreporter.write_line(f"[{status}] {name}: {detail}")
    terminalreporter.write_line("=" * 72)
