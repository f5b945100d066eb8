"""Exhaustive ground-truth engines for small node counts.

Everything here is brute force by design: these enumerations are the oracle
against which the combinatorial and Monte Carlo machinery is tested, so they
deliberately avoid sharing code paths with the fast implementations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .errors import NotDecomposable, TooLarge
from .graphs import (
    JunctionTree,
    LabeledGraph,
    graph_of,
    is_decomposable,
    maximal_cliques,
    _norm_edge,
)

ENUMERATION_GUARD = 6


def enumerate_decomposable(p: int, allow_large: bool = False) -> list[LabeledGraph]:
    """All chordal graphs on p labeled nodes, by filtering every edge set."""
    limit = 7 if allow_large else ENUMERATION_GUARD
    if not 1 <= p <= limit:
        raise TooLarge(f"p={p} beyond the enumeration guard ({limit})")
    slots = list(combinations(range(1, p + 1), 2))
    out = []
    for mask in range(1 << len(slots)):
        edges = frozenset(slots[i] for i in range(len(slots)) if mask >> i & 1)
        g = LabeledGraph(p, edges)
        if is_decomposable(g):
            out.append(g)
    return out


def _pruefer_trees(k: int):
    """All labeled trees on 0..k-1 via Pruefer decoding."""
    if k == 1:
        yield []
        return
    if k == 2:
        yield [(0, 1)]
        return
    for seq in product(range(k), repeat=k - 2):
        degree = [1] * k
        for x in seq:
            degree[x] += 1
        edges = []
        used = [False] * k
        for x in seq:
            leaf = min(i for i in range(k) if degree[i] == 1 and not used[i])
            edges.append((leaf, x))
            used[leaf] = True
            degree[leaf] -= 1
            degree[x] -= 1
        rest = [i for i in range(k) if not used[i] and degree[i] == 1]
        edges.append((rest[0], rest[1]))
        yield edges


def enumerate_junction_trees(g: LabeledGraph) -> list[JunctionTree]:
    """Every spanning tree of the cliques satisfying the junction property."""
    if not is_decomposable(g):
        raise NotDecomposable("cannot enumerate junction trees of a non-chordal graph")
    if g.node_count > ENUMERATION_GUARD:
        raise TooLarge(f"p={g.node_count} beyond the enumeration guard")
    cliques = tuple(maximal_cliques(g))
    k = len(cliques)
    out = []
    for edges in _pruefer_trees(k):
        t = JunctionTree(cliques, frozenset(_norm_edge(i, j) for i, j in edges))
        if _junction_property(t):
            out.append(t)
    return out


def _junction_property(t: JunctionTree) -> bool:
    nbrs = t.neighbors()
    for v in {u for c in t.cliques for u in c}:
        holders = {i for i, c in enumerate(t.cliques) if v in c}
        root = next(iter(holders))
        seen = {root}
        stack = [root]
        while stack:
            i = stack.pop()
            for j in nbrs[i]:
                if j in holders and j not in seen:
                    seen.add(j)
                    stack.append(j)
        if seen != holders:
            return False
    return True


@dataclass
class ExactPosterior:
    """Full graph posterior on p nodes: support, probabilities, normaliser."""

    graphs: list[LabeledGraph]
    log_scores: np.ndarray
    log_normaliser: float

    @property
    def probabilities(self) -> np.ndarray:
        return np.exp(self.log_scores - self.log_normaliser)

    def probability_of(self, g: LabeledGraph) -> float:
        for cand, prob in zip(self.graphs, self.probabilities):
            if cand == g:
                return float(prob)
        return 0.0

    def edge_marginals(self) -> np.ndarray:
        p = self.graphs[0].node_count
        mat = np.zeros((p, p))
        probs = self.probabilities
        for g, pr in zip(self.graphs, probs):
            for a, b in g.edges:
                mat[a - 1, b - 1] += pr
                mat[b - 1, a - 1] += pr
        return mat

    def tree_law(self) -> list[tuple[JunctionTree, float]]:
        """Exact junction-tree law tau(T) = pi(g(T)) / mu(g(T))."""
        from .treecount import count_junction_trees

        out = []
        probs = self.probabilities
        for g, pr in zip(self.graphs, probs):
            mu = count_junction_trees(g)
            for t in enumerate_junction_trees(g):
                out.append((t, pr / mu))
        return out

    def top(self, k: int) -> list[tuple[LabeledGraph, float]]:
        idx = np.argsort(-self.probabilities)[:k]
        probs = self.probabilities
        return [(self.graphs[i], float(probs[i])) for i in idx]


def exact_posterior(score_model, p: int, allow_large: bool = False) -> ExactPosterior:
    """pi(g) proportional to gamma(g) over every decomposable graph."""
    from .scoring import log_gamma_graph
    from .graphs import junction_tree_of

    graphs = enumerate_decomposable(p, allow_large=allow_large)
    order = tuple(range(1, p + 1))
    scores = np.array(
        [log_gamma_graph(score_model, junction_tree_of(g), order) for g in graphs]
    )
    finite = scores[np.isfinite(scores)]
    if finite.size == 0:
        raise ValueError("all graphs have zero score")
    shift = finite.max()
    log_norm = shift + math.log(np.exp(scores[np.isfinite(scores)] - shift).sum())
    return ExactPosterior(graphs, scores, log_norm)


def exact_expansion_support(t_m: JunctionTree) -> set[JunctionTree]:
    """All junction trees on m+1 nodes whose graph restricts to g(t_m)."""
    m = t_m.node_count
    if m > 4:
        raise TooLarge("exact expansion support guarded at 4 source nodes")
    g = graph_of(t_m)
    out = set()
    for mask in range(1 << m):
        new_edges = frozenset(
            _norm_edge(v, m + 1) for v in range(1, m + 1) if mask >> (v - 1) & 1
        )
        g_next = LabeledGraph(m + 1, g.edges | new_edges)
        if is_decomposable(g_next):
            out.update(enumerate_junction_trees(g_next))
    return out
