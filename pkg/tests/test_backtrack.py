import random

import pytest

from netolap.backtrack import NetworkQuery, QueryError, coverage_of, score_cell, topk_backtrack

from oracles import exhaustive_backtrack


def _material(engine):
    """(coordinate string, members, undirected edge pair set) for every coordinate."""
    out = []
    for coord in engine.lattice.all_coordinates():
        cell = engine.cell(coord)
        pairs = {
            frozenset((e.src, e.dst))
            for e in cell.subnetwork.edges
            if e.src != e.dst
        }
        out.append((cell.coordinate_string, list(cell.members), pairs))
    return out


def test_query_validation():
    with pytest.raises(QueryError):
        NetworkQuery.from_parts([])
    with pytest.raises(QueryError):
        NetworkQuery.from_parts(["a"], [("a", "zz")])


def test_score_exact_cell_is_one(cube42):
    engine = cube42["engine"]
    coord = engine.parse_coordinate("topic=topic0.0,year=year0")
    cell = engine.cell(coord)
    members = cell.members
    edge = next(e for e in cell.subnetwork.edges if e.src != e.dst)
    q = NetworkQuery.from_parts(members, [(edge.src, edge.dst)])
    hit = score_cell(cell, q)
    assert hit.coverage == 1.0
    assert hit.precision == 1.0
    assert hit.score == 1.0


def test_score_disjoint_cell_is_zero(cube42):
    engine = cube42["engine"]
    cell = engine.cell(engine.parse_coordinate("topic=topic0.0,year=year0"))
    other = engine.cell(engine.parse_coordinate("topic=topic1.3,year=year3"))
    q = NetworkQuery.from_parts(other.members[:3])
    assert score_cell(cell, q).score == 0.0


def test_score_formula_two_nodes_in_ten_node_cell():
    from netolap.olap import Cell
    from netolap.network import HeterogeneousNetwork, TypedNode

    nodes = [TypedNode(f"v{i}", "t") for i in range(10)]
    cell = Cell(
        coordinate=None,
        coordinate_string="c",
        members=[n.id for n in nodes],
        subnetwork=HeterogeneousNetwork(nodes, []),
    )
    q = NetworkQuery.from_parts(["v0", "v1"])
    hit = score_cell(cell, q, gamma=0.25)
    assert hit.coverage == 1.0
    assert hit.precision == pytest.approx(0.2)
    assert hit.score == pytest.approx(0.2**0.25)
    assert abs(hit.score - 0.66874) < 5e-6


def test_score_invariant_to_node_order(cube42):
    engine = cube42["engine"]
    cell = engine.cell(engine.parse_coordinate("topic=topic0"))
    ids = cell.members[:4]
    a = score_cell(cell, NetworkQuery.from_parts(ids))
    b = score_cell(cell, NetworkQuery.from_parts(list(reversed(ids))))
    assert a.score == b.score


def test_topk_matches_exhaustive_on_random_queries(cube42):
    engine = cube42["engine"]
    material = _material(engine)
    assert len(material) == 55  # 11 topic values x 5 year values
    rng = random.Random(99)
    all_ids = engine.base.node_ids()
    for trial in range(50):
        if rng.random() < 0.5:
            nodes = rng.sample(all_ids, rng.randrange(2, 6))
            edges = []
        else:
            cell = engine.cell(
                engine.parse_coordinate(
                    f"topic=topic{rng.randrange(2)}.{rng.randrange(4)},year=year{rng.randrange(4)}"
                )
            )
            pool = [e for e in cell.subnetwork.edges if e.src != e.dst]
            chosen = rng.sample(pool, min(2, len(pool)))
            nodes = sorted({x for e in chosen for x in (e.src, e.dst)})
            edges = [(e.src, e.dst) for e in chosen]
        k = rng.choice([1, 3, 5, 10])
        gamma = rng.choice([0.0, 0.25, 1.0])
        q = NetworkQuery.from_parts(nodes, edges)
        hits = engine.backtrack(q, k, gamma=gamma)
        expected = exhaustive_backtrack(
            material, nodes, [frozenset(e) for e in edges], k, gamma
        )
        assert len(hits) == len(expected)
        for hit, (escore, ecoord, ecov, eprec) in zip(hits, expected):
            assert hit.coordinate == ecoord
            assert hit.score == escore
            assert hit.coverage == ecov
            assert hit.precision == eprec


def test_zero_coverage_query_returns_canonical_order(cube42):
    engine = cube42["engine"]
    q = NetworkQuery.from_parts(["missing-1", "missing-2"])
    hits = engine.backtrack(q, 4)
    assert all(h.score == 0.0 for h in hits)
    strings = sorted(
        engine.lattice.canonical_string(c) for c in engine.lattice.all_coordinates()
    )
    assert [h.coordinate for h in hits] == strings[:4]


def test_k_exceeding_cube_returns_everything(cube42):
    engine = cube42["engine"]
    cell = engine.cell(engine.parse_coordinate("topic=topic0.0,year=year0"))
    q = NetworkQuery.from_parts(cell.members[:3])
    hits = engine.backtrack(q, 1000)
    assert len(hits) == 55
    scores = [h.score for h in hits]
    assert scores == sorted(scores, reverse=True)


def test_coverage_bound_is_sound(cube42):
    # score of any descendant never exceeds the coverage of its ancestor
    engine = cube42["engine"]
    rng = random.Random(3)
    ids = engine.base.node_ids()
    q = NetworkQuery.from_parts(rng.sample(ids, 5))
    coords = engine.lattice.all_coordinates()
    for anc in coords:
        ub = coverage_of(engine.cell(anc), q)
        for desc in coords:
            if anc != desc and engine.lattice.refines(desc, anc):
                assert score_cell(engine.cell(desc), q).score <= ub + 1e-15
