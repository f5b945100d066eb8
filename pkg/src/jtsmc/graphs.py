"""Undirected labeled graphs, chordality, and junction trees.

Graphs live on contiguous integer labels 1..p.  Junction trees are immutable:
a tuple of cliques (frozensets of node labels) plus a set of tree edges given
as index pairs into the clique tuple.  Equality and hashing ignore the clique
ordering, so two trees compare equal iff they have the same cliques and the
same clique-pair edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

from .errors import NotDecomposable


def _norm_edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class LabeledGraph:
    """Simple undirected graph on nodes 1..node_count."""

    node_count: int
    edges: frozenset[tuple[int, int]]

    @staticmethod
    def from_edges(node_count, edge_iter):
        edges = set()
        for a, b in edge_iter:
            if a == b:
                raise ValueError("self-loop")
            if not (1 <= a <= node_count and 1 <= b <= node_count):
                raise ValueError(f"edge ({a},{b}) outside 1..{node_count}")
            edges.add(_norm_edge(a, b))
        return LabeledGraph(node_count, frozenset(edges))

    def neighbors(self) -> dict[int, set[int]]:
        nbrs = {v: set() for v in range(1, self.node_count + 1)}
        for a, b in self.edges:
            nbrs[a].add(b)
            nbrs[b].add(a)
        return nbrs

    def has_edge(self, a: int, b: int) -> bool:
        return _norm_edge(a, b) in self.edges

    def restrict(self, keep: int) -> "LabeledGraph":
        """Induced subgraph on nodes 1..keep."""
        return LabeledGraph(keep, frozenset(e for e in self.edges if e[1] <= keep))

    def to_json(self) -> str:
        return json.dumps({"p": self.node_count, "edges": [list(e) for e in sorted(self.edges)]})

    @staticmethod
    def from_json(text: str) -> "LabeledGraph":
        obj = json.loads(text)
        return LabeledGraph.from_edges(obj["p"], [tuple(e) for e in obj["edges"]])


@dataclass(frozen=True)
class JunctionTree:
    """Clique tree with the running-intersection property.

    ``cliques`` are frozensets of node labels; ``edges`` holds index pairs
    (i, j), i < j, into ``cliques``.  Disconnected underlying graphs are
    represented by a single tree whose cross-component edges carry empty
    separators.
    """

    cliques: tuple[frozenset[int], ...]
    edges: frozenset[tuple[int, int]]
    node_count: int = field(init=False, repr=False, compare=False)
    _memo: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "node_count", max((max(c) for c in self.cliques if c), default=0)
        )
        object.__setattr__(self, "_memo", {})

    @property
    def _canon(self) -> frozenset:
        canon = self._memo.get("canon")
        if canon is None:
            canon = frozenset(
                frozenset((self.cliques[i], self.cliques[j])) for i, j in self.edges
            ) | frozenset((c,) for c in self.cliques)
            self._memo["canon"] = canon
        return canon

    def __eq__(self, other):
        return isinstance(other, JunctionTree) and self._canon == other._canon

    def __hash__(self):
        return hash(self._canon)

    def separator(self, i: int, j: int) -> frozenset[int]:
        return self.cliques[i] & self.cliques[j]

    def separators(self) -> list[frozenset[int]]:
        """Per-edge separators (multiset as a list)."""
        return [self.cliques[i] & self.cliques[j] for i, j in self.edges]

    def neighbors(self) -> dict[int, list[int]]:
        nbrs = {i: [] for i in range(len(self.cliques))}
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return nbrs

    def edge_key(self) -> frozenset:
        """Edges as frozensets of endpoint cliques (index-free)."""
        return frozenset(frozenset((self.cliques[i], self.cliques[j])) for i, j in self.edges)

    def to_json(self) -> str:
        order = sorted(range(len(self.cliques)), key=lambda i: sorted(self.cliques[i]))
        rank = {old: new for new, old in enumerate(order)}
        cliques = [sorted(self.cliques[i]) for i in order]
        edges = sorted(_norm_edge(rank[i], rank[j]) for i, j in self.edges)
        return json.dumps({"cliques": cliques, "tree_edges": [list(e) for e in edges]})

    @staticmethod
    def from_json(text: str) -> "JunctionTree":
        obj = json.loads(text)
        cliques = tuple(frozenset(c) for c in obj["cliques"])
        edges = frozenset(_norm_edge(i, j) for i, j in obj["tree_edges"])
        return JunctionTree(cliques, edges)


def mcs_order(g: LabeledGraph) -> list[int]:
    """Maximum cardinality search order; ties broken by smallest label."""
    p = g.node_count
    nbrs = g.neighbors()
    weight = {v: 0 for v in range(1, p + 1)}
    unnumbered = set(range(1, p + 1))
    order = []
    for _ in range(p):
        v = min(unnumbered, key=lambda u: (-weight[u], u))
        order.append(v)
        unnumbered.discard(v)
        for u in nbrs[v]:
            if u in unnumbered:
                weight[u] += 1
    return order


def _mcs_candidates(g: LabeledGraph):
    """MCS order plus, per vertex, its already-numbered neighbourhood."""
    nbrs = g.neighbors()
    order = mcs_order(g)
    pos = {v: i for i, v in enumerate(order)}
    madj = [frozenset(u for u in nbrs[v] if pos[u] < pos[v]) for v in order]
    return order, pos, madj


def is_decomposable(g: LabeledGraph) -> bool:
    """Chordality via MCS with the standard fill-in verification."""
    if g.node_count == 0:
        return True
    order, pos, madj = _mcs_candidates(g)
    for i, v in enumerate(order):
        if not madj[i]:
            continue
        parent = max(madj[i], key=lambda u: pos[u])
        if not (madj[i] - {parent}) <= madj[pos[parent]] | {parent}:
            return False
    return True


def maximal_cliques(g: LabeledGraph) -> list[frozenset[int]]:
    """Maximal cliques of a chordal graph in MCS discovery order."""
    order, pos, madj = _mcs_candidates(g)
    candidates = [madj[i] | {v} for i, v in enumerate(order)]
    cliques: list[frozenset[int]] = []
    for cand in candidates:
        if any(cand <= c for c in cliques):
            continue
        cliques = [c for c in cliques if not c < cand]
        cliques.append(cand)
    return cliques


def junction_tree_of(g: LabeledGraph) -> JunctionTree:
    """Canonical junction tree: MCS cliques + max-weight spanning tree.

    Tie-breaking is lexicographic on the sorted clique pair, which makes the
    construction deterministic (e.g. the empty graph yields a star at the
    clique containing node 1).
    """
    if not is_decomposable(g):
        raise NotDecomposable(f"graph with edges {sorted(g.edges)} is not chordal")
    if g.node_count == 0:
        return JunctionTree((), frozenset())
    cliques = maximal_cliques(g)
    k = len(cliques)
    pairs = sorted(
        combinations(range(k), 2),
        key=lambda ij: (
            -len(cliques[ij[0]] & cliques[ij[1]]),
            *sorted((sorted(cliques[ij[0]]), sorted(cliques[ij[1]]))),
        ),
    )
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = set()
    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.add(_norm_edge(i, j))
            if len(edges) == k - 1:
                break
    return JunctionTree(tuple(cliques), frozenset(edges))


@lru_cache(maxsize=1 << 15)
def graph_of(t: JunctionTree) -> LabeledGraph:
    """Union of complete graphs over the cliques."""
    edges = set()
    for c in t.cliques:
        edges.update(_norm_edge(a, b) for a, b in combinations(sorted(c), 2))
    return LabeledGraph(t.node_count, frozenset(edges))


def is_valid_junction_tree(t: JunctionTree) -> bool:
    """Full validity check: spanning tree, maximal cliques, junction property."""
    k = len(t.cliques)
    if k == 0:
        return True
    if len(t.edges) != k - 1:
        return False
    # connectivity
    nbrs = t.neighbors()
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in nbrs[i]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    if len(seen) != k:
        return False
    # cliques complete by construction of graph_of; check maximality/distinctness
    if len(set(t.cliques)) != k:
        return False
    for a, b in combinations(t.cliques, 2):
        if a <= b or b <= a:
            return False
    g = graph_of(t)
    if set(maximal_cliques(g)) != set(t.cliques):
        return False
    # junction property: for each node, the cliques containing it form a subtree
    for v in range(1, t.node_count + 1):
        holders = [i for i, c in enumerate(t.cliques) if v in c]
        if not holders:
            return False
        hset = set(holders)
        seen = {holders[0]}
        stack = [holders[0]]
        while stack:
            i = stack.pop()
            for j in nbrs[i]:
                if j in hset and j not in seen:
                    seen.add(j)
                    stack.append(j)
        if seen != hset:
            return False
    return True


@lru_cache(maxsize=1 << 14)
def _canonical_tree_cached(node_count: int, edges: frozenset) -> JunctionTree:
    return junction_tree_of(LabeledGraph(node_count, edges))


def canonical_tree(g: LabeledGraph) -> JunctionTree:
    """Memoised canonical junction tree (graphs are revisited heavily)."""
    return _canonical_tree_cached(g.node_count, g.edges)
