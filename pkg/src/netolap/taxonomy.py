"""Multi-facet taxonomy store: dimension trees, cell coordinates, lattice order."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

ROOT_ID = "*"

_NORM_RE = re.compile(r"[\W_]+", flags=re.UNICODE)


class TaxonomyError(ValueError):
    pass


class CoordinateError(ValueError):
    pass


def normalize_term(text: str) -> str:
    """Case-insensitive matching form: punctuation folded to single spaces."""
    return _NORM_RE.sub(" ", text.strip().lower()).strip()


@dataclass
class TaxonValue:
    id: str
    name: str
    aliases: list[str] = field(default_factory=list)
    children: list["TaxonValue"] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "aliases": list(self.aliases),
            "children": [c.to_dict() for c in self.children],
        }


class Taxonomy:
    """One rooted labeled tree; the root is always the aggregate value "*"."""

    def __init__(self, dimension_name: str, root: TaxonValue):
        if root.id != ROOT_ID:
            raise TaxonomyError(f"taxonomy root must have id {ROOT_ID!r}, got {root.id!r}")
        self.dimension_name = dimension_name
        self.root = root
        self._values: dict[str, TaxonValue] = {}
        self._parent: dict[str, str | None] = {}
        self._depth: dict[str, int] = {}
        # Euler intervals give O(1) descendant-or-equal tests
        self._tin: dict[str, int] = {}
        self._tout: dict[str, int] = {}

        clock = 0
        stack: list[tuple[TaxonValue, str | None, int, bool]] = [(root, None, 0, False)]
        while stack:
            value, parent, depth, exiting = stack.pop()
            if exiting:
                self._tout[value.id] = clock
                clock += 1
                continue
            if value.id in self._values:
                raise TaxonomyError(f"duplicate taxonomy value id {value.id!r}")
            self._values[value.id] = value
            self._parent[value.id] = parent
            self._depth[value.id] = depth
            self._tin[value.id] = clock
            clock += 1
            stack.append((value, parent, depth, True))
            for child in reversed(value.children):
                stack.append((child, value.id, depth + 1, False))

        self.max_depth = max(self._depth.values())

    def __contains__(self, value_id: str) -> bool:
        return value_id in self._values

    def value(self, value_id: str) -> TaxonValue:
        try:
            return self._values[value_id]
        except KeyError:
            raise TaxonomyError(
                f"unknown value {value_id!r} in dimension {self.dimension_name!r}"
            ) from None

    def values(self) -> list[str]:
        """All value ids in preorder."""
        return sorted(self._values, key=lambda v: self._tin[v])

    def value_count(self) -> int:
        return len(self._values)

    def parent(self, value_id: str) -> str | None:
        return self._parent[value_id]

    def depth(self, value_id: str) -> int:
        return self._depth[value_id]

    def children(self, value_id: str) -> list[str]:
        return [c.id for c in self.value(value_id).children]

    def is_leaf(self, value_id: str) -> bool:
        return not self.value(value_id).children

    def leaves(self) -> list[str]:
        return [v for v in self.values() if self.is_leaf(v)]

    def is_descendant_or_equal(self, value_id: str, ancestor_id: str) -> bool:
        return (
            self._tin[ancestor_id] <= self._tin[value_id]
            and self._tout[value_id] <= self._tout[ancestor_id]
        )

    def ancestors(self, value_id: str) -> list[str]:
        """Chain from the value itself up to the root (inclusive)."""
        chain = [value_id]
        while (p := self._parent[chain[-1]]) is not None:
            chain.append(p)
        return chain

    def ancestor_at_depth(self, value_id: str, depth: int) -> str:
        """Ancestor of `value_id` at `depth`, or the value itself if shallower."""
        if self._depth[value_id] <= depth:
            return value_id
        v = value_id
        while self._depth[v] > depth:
            v = self._parent[v]
        return v

    def values_at_level(self, level: int, under: str = ROOT_ID) -> list[str]:
        """Frontier at `level` below `under`: values at that exact depth plus
        shallower leaves, in preorder."""
        result = []
        for v in self.values():
            if not self.is_descendant_or_equal(v, under):
                continue
            d = self._depth[v]
            if d == level or (d < level and self.is_leaf(v) and d >= self._depth[under]):
                result.append(v)
        return result

    def euler_arrays(self):
        """(value_ids, tin, tout) aligned lists for vectorized membership tests."""
        ids = self.values()
        tin = [self._tin[v] for v in ids]
        tout = [self._tout[v] for v in ids]
        return ids, tin, tout

    def match_values(self, text: str) -> list[str]:
        """Value ids whose normalized name or alias equals normalized `text`."""
        if not hasattr(self, "_match_index"):
            index: dict[str, list[str]] = {}
            for v in self.values():
                if v == ROOT_ID:
                    continue
                value = self._values[v]
                terms = {normalize_term(value.name)} | {normalize_term(a) for a in value.aliases}
                terms.discard("")
                for term in terms:
                    bucket = index.setdefault(term, [])
                    if v not in bucket:
                        bucket.append(v)
            self._match_index = index
        return list(self._match_index.get(normalize_term(text), []))

    def to_dict(self) -> dict:
        return self.root.to_dict()


def _build_value(record: dict, seen_path: list[str]) -> TaxonValue:
    if not isinstance(record, dict):
        raise TaxonomyError("taxonomy record must be an object")
    try:
        value_id = record["id"]
    except KeyError:
        raise TaxonomyError("taxonomy record missing 'id'") from None
    if not isinstance(value_id, str) or not value_id:
        raise TaxonomyError("taxonomy value id must be a non-empty string")
    if value_id in seen_path:
        raise TaxonomyError(f"cycle detected at value {value_id!r}")
    name = record.get("name", value_id)
    aliases = record.get("aliases", [])
    if not isinstance(aliases, list):
        raise TaxonomyError(f"aliases of {value_id!r} must be a list")
    # lower-case and deduplicate, preserving first occurrence
    cleaned: list[str] = []
    for a in aliases:
        low = str(a).lower()
        if low and low not in cleaned:
            cleaned.append(low)
    children = record.get("children", [])
    if not isinstance(children, list):
        raise TaxonomyError(f"children of {value_id!r} must be a list")
    node = TaxonValue(value_id, str(name), cleaned)
    for child in children:
        node.children.append(_build_value(child, seen_path + [value_id]))
    return node


def load_taxonomy(source: str | dict | list, dimension_name: str) -> Taxonomy:
    """Parse one dimension tree.

    Accepts a JSON object (the root), or a list of top-level subtrees; in
    either case a root "*" wrapper is added implicitly unless the object
    itself has id "*".
    """
    if isinstance(source, str):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise TaxonomyError(f"invalid taxonomy JSON: {exc.msg}") from exc
    else:
        data = source

    if isinstance(data, list):
        if not data:
            raise TaxonomyError("missing root: taxonomy source is empty")
        root = TaxonValue(ROOT_ID, "all")
        for sub in data:
            root.children.append(_build_value(sub, [ROOT_ID]))
    elif isinstance(data, dict):
        if data.get("id") == ROOT_ID:
            root = _build_value(data, [])
        else:
            root = TaxonValue(ROOT_ID, "all")
            root.children.append(_build_value(data, [ROOT_ID]))
    else:
        raise TaxonomyError("missing root: taxonomy source must be an object or list")

    return Taxonomy(dimension_name, root)


class CellCoordinate(tuple):
    """One taxonomy value id per dimension, aligned with the lattice order."""

    def __new__(cls, values: tuple[str, ...]):
        return super().__new__(cls, values)


class CubeLattice:
    """Ordered dimensions and the product-of-trees partial order over coordinates."""

    def __init__(self, dimensions: list[Taxonomy]):
        if not dimensions:
            raise TaxonomyError("a lattice needs at least one dimension")
        names = [t.dimension_name for t in dimensions]
        if len(set(names)) != len(names):
            raise TaxonomyError("duplicate dimension names")
        self.dimensions = dimensions
        self.dim_names = names
        self._by_name = {t.dimension_name: t for t in dimensions}

    def taxonomy(self, dim: str) -> Taxonomy:
        try:
            return self._by_name[dim]
        except KeyError:
            raise CoordinateError(f"unknown dimension {dim!r}") from None

    def dim_index(self, dim: str) -> int:
        try:
            return self.dim_names.index(dim)
        except ValueError:
            raise CoordinateError(f"unknown dimension {dim!r}") from None

    def top(self) -> CellCoordinate:
        return CellCoordinate(tuple(ROOT_ID for _ in self.dimensions))

    def coordinate(self, mapping: dict[str, str]) -> CellCoordinate:
        values = []
        for tax in self.dimensions:
            v = mapping.get(tax.dimension_name, ROOT_ID)
            if v not in tax:
                raise CoordinateError(
                    f"unknown value {v!r} in dimension {tax.dimension_name!r}"
                )
            values.append(v)
        extra = set(mapping) - set(self.dim_names)
        if extra:
            raise CoordinateError(f"unknown dimension {sorted(extra)[0]!r}")
        return CellCoordinate(tuple(values))

    def canonical_string(self, coord: CellCoordinate) -> str:
        parts = [
            f"{name}={value}"
            for name, value in zip(self.dim_names, coord)
            if value != ROOT_ID
        ]
        return ",".join(parts)

    def parse_coordinate(self, text: str) -> CellCoordinate:
        """Grammar: `dim=valueId(,dim=valueId)*`; omitted dims default to "*".

        The empty string (or a bare "*", for URL friendliness) is the
        all-aggregate top coordinate.
        """
        text = text.strip()
        if text in ("", ROOT_ID):
            return self.top()
        mapping: dict[str, str] = {}
        for part in text.split(","):
            part = part.strip()
            if not part:
                raise CoordinateError(f"empty coordinate component in {text!r}")
            if "=" not in part:
                raise CoordinateError(f"expected dim=value, got {part!r}")
            dim, _, value = part.partition("=")
            dim, value = dim.strip(), value.strip()
            if dim not in self._by_name:
                raise CoordinateError(f"unknown dimension {dim!r}")
            if dim in mapping:
                raise CoordinateError(f"duplicate dimension {dim!r}")
            if value not in self._by_name[dim]:
                raise CoordinateError(f"unknown value {value!r} in dimension {dim!r}")
            mapping[dim] = value
        return self.coordinate(mapping)

    def refines(self, a: CellCoordinate, b: CellCoordinate) -> bool:
        """True iff a ⪯ b: every value of a is a descendant-or-equal of b's."""
        return all(
            tax.is_descendant_or_equal(va, vb)
            for tax, va, vb in zip(self.dimensions, a, b)
        )

    def lattice_relations(self, a: CellCoordinate, b: CellCoordinate) -> str:
        """Relation of `a` to `b`: ancestor, descendant, equal, or incomparable."""
        if a == b:
            return "equal"
        if self.refines(b, a):
            return "ancestor"
        if self.refines(a, b):
            return "descendant"
        return "incomparable"

    def children_coordinates(self, coord: CellCoordinate) -> list[CellCoordinate]:
        """Refine exactly one dimension of `coord` by one taxonomy step."""
        out = []
        for i, tax in enumerate(self.dimensions):
            for child in tax.children(coord[i]):
                out.append(CellCoordinate(coord[:i] + (child,) + coord[i + 1 :]))
        return out

    def parent_coordinates(self, coord: CellCoordinate) -> list[CellCoordinate]:
        out = []
        for i, tax in enumerate(self.dimensions):
            p = tax.parent(coord[i])
            if p is not None:
                out.append(CellCoordinate(coord[:i] + (p,) + coord[i + 1 :]))
        return out

    def all_coordinates(self) -> list[CellCoordinate]:
        """Every coordinate of the (virtual) cube; only for desk-scale lattices."""
        coords = [()]
        for tax in self.dimensions:
            values = tax.values()
            coords = [c + (v,) for c in coords for v in values]
        return [CellCoordinate(tuple(c)) for c in coords]

    def coordinate_count(self) -> int:
        total = 1
        for tax in self.dimensions:
            total *= tax.value_count()
        return total
