"""Closed frequent subgraph mining inside a cell, with contextual scoring.

Patterns are connected simple graphs whose vertices carry node types and
whose edges carry edge types. Enumeration is DFS-code based with rightmost
extension; a pattern is kept only when its code is the minimum DFS code, so
every pattern is visited exactly once. Single-graph frequency is MNI
(minimum node image), which is anti-monotone and therefore safe for
support pruning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .network import HeterogeneousNetwork

DEFAULT_MAX_EDGES = 6
DEFAULT_EMBEDDING_CAP = 500_000


class MiningError(ValueError):
    pass


class EmbeddingOverflowError(RuntimeError):
    """Embedding enumeration exceeded the configured cap."""


class LabeledGraph:
    """Undirected labeled view of a network: vertex ids 0..n-1, per-pair edge label sets."""

    def __init__(self, node_ids: list[str], labels: list[str]):
        self.node_ids = node_ids
        self.labels = labels
        self.n = len(node_ids)
        self.adj: list[dict[int, tuple[str, ...]]] = [dict() for _ in range(self.n)]
        self.label_counts: dict[str, int] = {}
        for lb in labels:
            self.label_counts[lb] = self.label_counts.get(lb, 0) + 1
        self.edge_labels: set[str] = set()

    def add_pair(self, a: int, b: int, elabels: set[str]):
        ordered = tuple(sorted(elabels))
        self.adj[a][b] = ordered
        self.adj[b][a] = ordered
        self.edge_labels.update(ordered)

    def pair_labels(self, a: int, b: int) -> tuple[str, ...]:
        return self.adj[a].get(b, ())

    @classmethod
    def from_network(cls, net: HeterogeneousNetwork) -> "LabeledGraph":
        g = cls([n.id for n in net.nodes], [n.node_type for n in net.nodes])
        pair_types: dict[tuple[int, int], set[str]] = {}
        for e in net.edges:
            a, b = net.node_index(e.src), net.node_index(e.dst)
            if a == b:
                continue  # self-loops carry no pattern structure
            key = (a, b) if a < b else (b, a)
            pair_types.setdefault(key, set()).add(e.edge_type)
        for (a, b), elabels in pair_types.items():
            g.add_pair(a, b, elabels)
        return g


@dataclass(frozen=True)
class PatternGraph:
    """Connected labeled pattern; `edges` hold (u, v, edge_label) with u < v."""

    node_labels: tuple[str, ...]
    edges: tuple[tuple[int, int, str], ...]

    @cached_property
    def canonical_code(self) -> str:
        if not self.edges:
            return f"v({self.node_labels[0]})"
        code = minimum_dfs_code(self.node_labels, self.edges)
        return ";".join(f"({i},{j},{li},{le},{lj})" for i, j, li, le, lj in code)

    def adjacency(self) -> list[dict[int, str]]:
        adj: list[dict[int, str]] = [dict() for _ in self.node_labels]
        for u, v, el in self.edges:
            adj[u][v] = el
            adj[v][u] = el
        return adj

    def edge_count(self) -> int:
        return len(self.edges)

    def to_dict(self) -> dict:
        return {
            "code": self.canonical_code,
            "node_labels": list(self.node_labels),
            "edges": [[u, v, el] for u, v, el in self.edges],
        }


# ---------------------------------------------------------------------------
# minimum DFS code


def _rmpath_positions(code) -> list[int]:
    """Vertex positions on the rightmost path of a DFS code, root first."""
    path_edges = []
    old_frm = -1
    for idx in range(len(code) - 1, -1, -1):
        frm, to = code[idx][0], code[idx][1]
        if frm < to and (old_frm == -1 or to == old_frm):
            path_edges.append(idx)
            old_frm = frm
    positions = [0]
    for idx in reversed(path_edges):
        positions.append(code[idx][1])
    return positions


def _code_pairs(code) -> set[tuple[int, int]]:
    return {(min(e[0], e[1]), max(e[0], e[1])) for e in code}


def minimum_dfs_code(node_labels, edges):
    """Greedy construction of the minimum DFS code of a connected pattern.

    Projects the pattern onto itself; at every step the comparator-least
    extension over all live self-embeddings is chosen (backward edges before
    forward, deeper rightmost-path sources first, then label order), which
    yields the global lexicographic minimum.
    """
    adj: list[dict[int, str]] = [dict() for _ in node_labels]
    for u, v, el in edges:
        adj[u][v] = el
        adj[v][u] = el

    best_triple = None
    for a in range(len(node_labels)):
        for b, el in adj[a].items():
            triple = (node_labels[a], el, node_labels[b])
            if best_triple is None or triple < best_triple:
                best_triple = triple
    embeddings = [
        (a, b)
        for a in range(len(node_labels))
        for b, el in adj[a].items()
        if (node_labels[a], el, node_labels[b]) == best_triple
    ]
    code = [(0, 1, *best_triple)]

    while len(code) < len(edges):
        rmpath = _rmpath_positions(code)
        rightmost = rmpath[-1]
        n_positions = max(max(e[0], e[1]) for e in code) + 1
        used_pairs = _code_pairs(code)
        pos_label = {}
        for i, j, li, le, lj in code:
            pos_label[i] = li
            pos_label[j] = lj

        best_key = None
        best_edge = None
        best_embeddings = []
        for emb in embeddings:
            image = set(emb)
            # backward from the rightmost vertex to earlier rightmost-path vertices
            for p in rmpath[:-1]:
                if (min(rightmost, p), max(rightmost, p)) in used_pairs:
                    continue
                el = adj[emb[rightmost]].get(emb[p])
                if el is None:
                    continue
                key = (0, p, el)
                edge5 = (rightmost, p, pos_label[rightmost], el, pos_label[p])
                if best_key is None or key < best_key:
                    best_key, best_edge, best_embeddings = key, edge5, [emb]
                elif key == best_key:
                    best_embeddings.append(emb)
            # forward from rightmost-path vertices to fresh pattern vertices
            for u in rmpath:
                a = emb[u]
                for b, el in adj[a].items():
                    if b in image:
                        continue
                    key = (1, -u, el, node_labels[b])
                    edge5 = (u, n_positions, pos_label[u], el, node_labels[b])
                    if best_key is None or key < best_key:
                        best_key, best_edge, best_embeddings = key, edge5, [(*emb, b)]
                    elif key == best_key:
                        best_embeddings.append((*emb, b))
        code.append(best_edge)
        embeddings = best_embeddings
    return tuple(code)


def pattern_from_code(code) -> PatternGraph:
    n = max(max(e[0], e[1]) for e in code) + 1
    labels: list[str | None] = [None] * n
    edges = []
    for i, j, li, le, lj in code:
        labels[i] = li
        labels[j] = lj
        edges.append((min(i, j), max(i, j), le))
    return PatternGraph(tuple(labels), tuple(sorted(edges)))


# ---------------------------------------------------------------------------
# MNI support


def _match_order(p: PatternGraph) -> list[int]:
    """Vertex visit order where each vertex (after the first) touches a prior one."""
    adj = p.adjacency()
    order = [0]
    seen = {0}
    while len(order) < len(p.node_labels):
        for v in range(len(p.node_labels)):
            if v not in seen and any(u in seen for u in adj[v]):
                order.append(v)
                seen.add(v)
                break
    return order


def enumerate_embeddings(p: PatternGraph, g: LabeledGraph, cap: int = DEFAULT_EMBEDDING_CAP):
    """Yield every injective label-preserving map of `p` into `g` as a tuple."""
    n = len(p.node_labels)
    adj = p.adjacency()
    order = _match_order(p)
    candidates0 = [v for v in range(g.n) if g.labels[v] == p.node_labels[order[0]]]
    assignment: dict[int, int] = {}
    used: set[int] = set()
    count = 0

    def backtrack(step: int):
        nonlocal count
        if step == n:
            count += 1
            if count > cap:
                raise EmbeddingOverflowError(
                    f"more than {cap} embeddings for pattern {p.canonical_code}"
                )
            yield tuple(assignment[i] for i in range(n))
            return
        pv = order[step]
        anchored = [(u, adj[pv][u]) for u in adj[pv] if u in assignment]
        if anchored:
            first_u, first_el = anchored[0]
            pool = [
                w
                for w in g.adj[assignment[first_u]]
                if first_el in g.adj[assignment[first_u]][w]
            ]
        else:
            pool = candidates0
        for w in pool:
            if w in used or g.labels[w] != p.node_labels[pv]:
                continue
            ok = True
            for u, el in anchored:
                if el not in g.pair_labels(assignment[u], w):
                    ok = False
                    break
            if not ok:
                continue
            assignment[pv] = w
            used.add(w)
            yield from backtrack(step + 1)
            del assignment[pv]
            used.discard(w)

    yield from backtrack(0)


def mni_support(p: PatternGraph, g: LabeledGraph, cap: int = DEFAULT_EMBEDDING_CAP) -> int:
    """Minimum over pattern vertices of the number of distinct image nodes."""
    if len(p.node_labels) == 1:
        return g.label_counts.get(p.node_labels[0], 0)
    images: list[set[int]] = [set() for _ in p.node_labels]
    for emb in enumerate_embeddings(p, g, cap=cap):
        for i, w in enumerate(emb):
            images[i].add(w)
    if not images[0]:
        return 0
    return min(len(s) for s in images)


# ---------------------------------------------------------------------------
# closed mining


def one_edge_extensions(p: PatternGraph, node_alphabet, edge_alphabet):
    """Every simple pattern obtained from `p` by adding one labeled edge."""
    out = []
    adj = p.adjacency()
    n = len(p.node_labels)
    for u in range(n):
        for v in range(u + 1, n):
            if v in adj[u]:
                continue
            for el in edge_alphabet:
                out.append(PatternGraph(p.node_labels, tuple(sorted(p.edges + ((u, v, el),)))))
    for u in range(n):
        for nl in node_alphabet:
            for el in edge_alphabet:
                out.append(
                    PatternGraph(p.node_labels + (nl,), tuple(sorted(p.edges + ((u, n, el),))))
                )
    return out


def _mni_from_projections(projections, n_positions: int) -> int:
    images: list[set[int]] = [set() for _ in range(n_positions)]
    for emb in projections:
        for i, w in enumerate(emb):
            images[i].add(w)
    return min(len(s) for s in images)


def mine_frequent_patterns(
    g: LabeledGraph,
    min_support: int,
    max_edges: int = DEFAULT_MAX_EDGES,
    cap: int = DEFAULT_EMBEDDING_CAP,
) -> dict[str, tuple[PatternGraph, int]]:
    """All connected patterns with MNI support >= min_support, by canonical code."""
    if min_support < 1:
        raise MiningError(f"min_support must be at least 1, got {min_support}")
    found: dict[str, tuple[PatternGraph, int]] = {}

    for label in sorted(g.label_counts):
        supp = g.label_counts[label]
        if supp >= min_support:
            p = PatternGraph((label,), ())
            found[p.canonical_code] = (p, supp)

    if max_edges < 1:
        return found

    # seed 1-edge codes grouped by oriented label triple (li <= lj is canonical)
    seeds: dict[tuple[str, str, str], list[tuple[int, int]]] = {}
    for a in range(g.n):
        for b, elabels in g.adj[a].items():
            for el in elabels:
                triple = (g.labels[a], el, g.labels[b])
                if triple[0] <= triple[2]:
                    seeds.setdefault(triple, []).append((a, b))

    def grow(code: list, projections: list[tuple[int, ...]]):
        n_positions = max(max(e[0], e[1]) for e in code) + 1
        pattern = pattern_from_code(code)
        support = _mni_from_projections(projections, n_positions)
        if support < min_support:
            return
        found[pattern.canonical_code] = (pattern, support)
        if len(code) >= max_edges:
            return

        rmpath = _rmpath_positions(code)
        rightmost = rmpath[-1]
        used_pairs = _code_pairs(code)
        pos_label = {}
        for i, j, li, le, lj in code:
            pos_label[i] = li
            pos_label[j] = lj

        candidates: dict[tuple, list[tuple[int, ...]]] = {}
        for emb in projections:
            image = set(emb)
            for ppos in rmpath[:-1]:
                if (min(rightmost, ppos), max(rightmost, ppos)) in used_pairs:
                    continue
                for el in g.pair_labels(emb[rightmost], emb[ppos]):
                    edge5 = (rightmost, ppos, pos_label[rightmost], el, pos_label[ppos])
                    candidates.setdefault(edge5, []).append(emb)
            for u in rmpath:
                for b, elabels in g.adj[emb[u]].items():
                    if b in image:
                        continue
                    for el in elabels:
                        edge5 = (u, n_positions, pos_label[u], el, g.labels[b])
                        candidates.setdefault(edge5, []).append((*emb, b))

        if sum(len(v) for v in candidates.values()) > cap:
            raise EmbeddingOverflowError(f"projection count exceeded cap {cap}")
        for edge5 in sorted(candidates):
            new_code = code + [edge5]
            candidate = pattern_from_code(new_code)
            if tuple(new_code) != minimum_dfs_code(candidate.node_labels, candidate.edges):
                continue
            grow(new_code, candidates[edge5])

    # both orientations of same-label pairs are already present in `seeds`
    for triple in sorted(seeds):
        grow([(0, 1, *triple)], [tuple(pair) for pair in seeds[triple]])
    return found


def mine_closed_patterns(
    net: HeterogeneousNetwork,
    min_support: int,
    max_edges: int = DEFAULT_MAX_EDGES,
    cap: int = DEFAULT_EMBEDDING_CAP,
) -> list[tuple[PatternGraph, int]]:
    """Frequent patterns none of whose one-edge extensions has equal support."""
    if net.node_count() == 0:
        raise MiningError("cell is empty")
    g = LabeledGraph.from_network(net)
    frequent = mine_frequent_patterns(g, min_support, max_edges, cap=cap)
    node_alphabet = sorted(g.label_counts)
    edge_alphabet = sorted(g.edge_labels)
    closed: list[tuple[PatternGraph, int]] = []
    for code in sorted(frequent):
        p, supp = frequent[code]
        if not any(
            mni_support(q, g, cap=cap) == supp
            for q in one_edge_extensions(p, node_alphabet, edge_alphabet)
        ):
            closed.append((p, supp))
    return closed


# ---------------------------------------------------------------------------
# contextual scoring


@dataclass
class ScoredPattern:
    pattern: PatternGraph
    support: int
    popularity: float
    integrity: float
    distinctiveness: float | None
    combined: float
    weights: tuple[float, float, float]
    infinite_distinctiveness: bool = False
    sibling_rates: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = self.pattern.to_dict()
        d.update(
            {
                "support": self.support,
                "popularity": self.popularity,
                "integrity": self.integrity,
                "distinctiveness": self.distinctiveness,
                "combined": self.combined,
                "weights": {
                    "popularity": self.weights[0],
                    "integrity": self.weights[1],
                    "distinctiveness": self.weights[2],
                },
                "infinite_distinctiveness": self.infinite_distinctiveness,
                "sibling_rates": self.sibling_rates,
            }
        )
        return d


def max_subpatterns(p: PatternGraph) -> list[PatternGraph]:
    """Connected sub-patterns left by deleting one edge (components kept separately)."""
    out = []
    seen = set()
    for drop in range(len(p.edges)):
        remaining = p.edges[:drop] + p.edges[drop + 1 :]
        adj: dict[int, list[int]] = {i: [] for i in range(len(p.node_labels))}
        for u, v, _ in remaining:
            adj[u].append(v)
            adj[v].append(u)
        unvisited = set(range(len(p.node_labels)))
        while unvisited:
            start = min(unvisited)
            comp = {start}
            stack = [start]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in comp:
                        comp.add(y)
                        stack.append(y)
            unvisited -= comp
            ordered = sorted(comp)
            remap = {v: i for i, v in enumerate(ordered)}
            sub = PatternGraph(
                tuple(p.node_labels[v] for v in ordered),
                tuple(
                    sorted(
                        (min(remap[u], remap[v]), max(remap[u], remap[v]), el)
                        for u, v, el in remaining
                        if u in comp and v in comp
                    )
                ),
            )
            if sub.canonical_code not in seen:
                seen.add(sub.canonical_code)
                out.append(sub)
    return out


def score_pattern(
    p: PatternGraph,
    support: int,
    cell_graph: LabeledGraph,
    sibling_graphs: list[tuple[str, LabeledGraph]],
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
    cell_key: str | None = None,
    cap: int = DEFAULT_EMBEDDING_CAP,
) -> ScoredPattern:
    """Mixture score: popularity (size-normalized frequency), integrity
    (support ratio vs the best one-edge-removed sub-pattern), distinctiveness
    (rate vs the sibling-cell average, the cell itself included)."""
    w_p, w_i, w_d = weights
    popularity = support / cell_graph.n

    if not p.edges:
        integrity = 1.0
    else:
        best_sub = max(mni_support(q, cell_graph, cap=cap) for q in max_subpatterns(p))
        integrity = support / best_sub if best_sub > 0 else 1.0

    own_rate = support / cell_graph.n if cell_graph.n else 0.0
    own_key = cell_key if cell_key is not None else "self"
    rates: dict[str, float] = {own_key: own_rate}
    for key, sib in sibling_graphs:
        if key == own_key:
            continue
        rates[key] = (mni_support(p, sib, cap=cap) / sib.n) if sib.n else 0.0
    mean_rate = sum(rates.values()) / len(rates)

    if mean_rate == 0.0:
        combined = (popularity**w_p) * (integrity**w_i)
        return ScoredPattern(
            p, support, popularity, integrity, None, combined, (w_p, w_i, w_d), True, rates
        )
    distinctiveness = own_rate / mean_rate
    combined = (popularity**w_p) * (integrity**w_i) * (distinctiveness**w_d)
    return ScoredPattern(
        p, support, popularity, integrity, distinctiveness, combined, (w_p, w_i, w_d), False, rates
    )


def rank_patterns(scored: list[ScoredPattern]) -> list[ScoredPattern]:
    """Descending combined score; infinitely distinctive patterns first;
    ties resolve by canonical code."""
    return sorted(
        scored,
        key=lambda s: (
            0 if s.infinite_distinctiveness else 1,
            -s.combined,
            s.pattern.canonical_code,
        ),
    )
