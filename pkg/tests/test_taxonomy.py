import json

import pytest

from netolap.taxonomy import (
    CoordinateError,
    CubeLattice,
    TaxonomyError,
    load_taxonomy,
    normalize_term,
)

from conftest import simple_lattice

TOPIC_TREE = {
    "id": "*",
    "name": "all",
    "children": [
        {
            "id": "ML",
            "name": "machine learning",
            "aliases": ["ml"],
            "children": [
                {"id": "NN", "name": "neural networks", "aliases": ["Neural Networks", "nn"]},
                {"id": "SVM", "name": "support vector machines"},
                {"id": "RL", "name": "reinforcement learning"},
            ],
        },
        {"id": "DB", "name": "databases", "children": [{"id": "SQL", "name": "sql"}]},
    ],
}

YEAR_TREE = {
    "id": "*",
    "name": "all",
    "children": [{"id": str(y), "name": str(y)} for y in (2017, 2018, 2019)],
}


@pytest.fixture
def lattice():
    return simple_lattice({"topic": TOPIC_TREE, "year": YEAR_TREE})


def test_single_root_taxonomy():
    tax = load_taxonomy({"id": "*", "name": "all"}, "d")
    assert tax.value_count() == 1
    assert tax.max_depth == 0
    assert tax.leaves() == ["*"]


def test_depths_and_ancestry():
    tax = load_taxonomy(TOPIC_TREE, "topic")
    assert tax.value_count() == 7
    assert tax.depth("NN") == 2
    assert tax.is_descendant_or_equal("NN", "ML")
    assert not tax.is_descendant_or_equal("ML", "NN")
    assert tax.ancestors("NN") == ["NN", "ML", "*"]


def test_balanced_tree_value_count():
    def subtree(prefix, depth):
        node = {"id": prefix, "name": prefix, "children": []}
        if depth < 2:
            node["children"] = [subtree(f"{prefix}.{i}", depth + 1) for i in range(4)]
        return node

    tree = {"id": "*", "name": "all", "children": [subtree(f"c{i}", 1) for i in range(4)]}
    tax = load_taxonomy(tree, "d")
    assert tax.value_count() == 1 + 4 + 16


def test_implicit_root_wrapper():
    tax = load_taxonomy({"id": "ML", "name": "ml"}, "topic")
    assert "ML" in tax
    assert tax.parent("ML") == "*"


def test_aliases_lowercased_and_deduplicated():
    tax = load_taxonomy(
        {"id": "X", "name": "x", "aliases": ["Foo", "foo", "BAR"]}, "d"
    )
    assert tax.value("X").aliases == ["foo", "bar"]


def test_duplicate_id_rejected():
    tree = {"id": "*", "children": [{"id": "A"}, {"id": "A"}]}
    with pytest.raises(TaxonomyError, match="duplicate"):
        load_taxonomy(tree, "d")


def test_missing_root_rejected():
    with pytest.raises(TaxonomyError, match="missing root"):
        load_taxonomy([], "d")


def test_cycle_rejected():
    tree = {"id": "A", "children": [{"id": "A"}]}
    with pytest.raises(TaxonomyError, match="cycle|duplicate"):
        load_taxonomy(tree, "d")


def test_normalize_term_folds_case_and_punctuation():
    assert normalize_term("  Neural-Networks!  ") == "neural networks"
    assert normalize_term("graph_mining") == "graph mining"


def test_parse_empty_coordinate_is_top(lattice):
    coord = lattice.parse_coordinate("")
    assert coord == lattice.top()
    assert lattice.canonical_string(coord) == ""
    assert lattice.parse_coordinate("*") == coord


def test_parse_partial_coordinate(lattice):
    coord = lattice.parse_coordinate("topic=ML,year=2018")
    assert coord == ("ML", "2018")
    assert lattice.parse_coordinate("topic=ML") == ("ML", "*")


def test_parse_unknown_value(lattice):
    with pytest.raises(CoordinateError, match="unknown value"):
        lattice.parse_coordinate("topic=NoSuchValue")
    with pytest.raises(CoordinateError, match="unknown dimension"):
        lattice.parse_coordinate("venue=X")
    with pytest.raises(CoordinateError, match="duplicate dimension"):
        lattice.parse_coordinate("topic=ML,topic=DB")


def test_coordinate_round_trip(lattice):
    for coord in lattice.all_coordinates():
        text = lattice.canonical_string(coord)
        assert lattice.parse_coordinate(text) == coord


def test_lattice_relations(lattice):
    a = lattice.parse_coordinate("topic=ML")
    assert lattice.lattice_relations(a, a) == "equal"
    top = lattice.top()
    other = lattice.parse_coordinate("topic=DB,year=2018")
    assert lattice.lattice_relations(top, other) == "ancestor"
    assert lattice.lattice_relations(other, top) == "descendant"
    b = lattice.parse_coordinate("topic=ML,year=*")
    c = lattice.parse_coordinate("topic=DB,year=2018")
    assert lattice.lattice_relations(b, c) == "incomparable"


def test_relations_match_product_order(lattice):
    coords = lattice.all_coordinates()
    for a in coords[:12]:
        for b in coords[:12]:
            rel = lattice.lattice_relations(a, b)
            below = lattice.refines(a, b)
            above = lattice.refines(b, a)
            if a == b:
                assert rel == "equal"
            elif above and not below:
                assert rel == "ancestor"
            elif below and not above:
                assert rel == "descendant"
            else:
                assert rel == "incomparable"


def test_children_counts(lattice):
    leaf = lattice.parse_coordinate("topic=NN,year=2018")
    assert lattice.children_coordinates(leaf) == []
    # ML has 3 children, 2018 has none
    mixed = lattice.parse_coordinate("topic=ML,year=2018")
    assert len(lattice.children_coordinates(mixed)) == 3
    # top: topic root has 2 children, year root has 3
    assert len(lattice.children_coordinates(lattice.top())) == 5


def test_children_are_covers(lattice):
    for coord in lattice.all_coordinates():
        for child in lattice.children_coordinates(coord):
            assert lattice.lattice_relations(child, coord) == "descendant"
            # nothing strictly between parent and child along the refined dim
            diffs = [i for i in range(len(coord)) if coord[i] != child[i]]
            assert len(diffs) == 1
            d = diffs[0]
            tax = lattice.dimensions[d]
            assert tax.parent(child[d]) == coord[d]
