"""Data ingestion, bundled fixtures, and synthetic-data generators."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotDecomposable, NotPositiveDefinite
from .graphs import LabeledGraph, junction_tree_of, is_decomposable

# Czech autoworkers 2^6 contingency table (1841 men, six binary risk factors
# for coronary thrombosis).  Flattened column-major with the first variable
# varying fastest; variable order: smoking, strenuous mental work, strenuous
# physical work, systolic blood pressure, beta/alpha lipoprotein ratio,
# family anamnesis.  Level 0 = yes, 1 = no.
CZECH_VARIABLES = ["smoke", "mental", "physical", "systolic", "protein", "family"]
CZECH_COUNTS = [
    44, 40, 112, 67, 129, 145, 12, 23, 35, 12, 80, 33, 109, 67, 7, 9,
    23, 32, 70, 66, 50, 80, 7, 13, 24, 25, 73, 57, 51, 63, 7, 16,
    5, 7, 21, 9, 9, 17, 1, 4, 4, 3, 11, 8, 14, 17, 5, 2,
    7, 3, 14, 14, 9, 16, 2, 3, 4, 0, 13, 11, 5, 14, 4, 4,
]


def czech_autoworkers() -> tuple[np.ndarray, list[str]]:
    """Expand the bundled table to an observation matrix (1841 x 6)."""
    total = sum(CZECH_COUNTS)
    if total != 1841:
        raise DimensionMismatch(f"czech fixture total {total} != 1841")
    rows = []
    for cell, count in enumerate(CZECH_COUNTS):
        levels = [(cell >> k) & 1 for k in range(6)]
        rows.extend([levels] * count)
    return np.array(rows, dtype=np.int64), list(CZECH_VARIABLES)


@dataclass
class Dataset:
    names: list[str]
    values: np.ndarray
    discrete: bool

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def cardinalities(self, overrides=None):
        if not self.discrete:
            raise DimensionMismatch("cardinalities only apply to discrete data")
        cards = (self.values.max(axis=0) + 1).astype(int).tolist()
        if overrides:
            for name, card in overrides.items():
                cards[self.names.index(name)] = int(card)
        return cards


def load_csv(path) -> Dataset:
    """First row = variable names; integer columns are treated as discrete."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        names = next(reader)
        raw = [row for row in reader if row]
    if not raw:
        raise DimensionMismatch(f"{path}: no observations")
    arr = np.array(raw, dtype=float)
    if arr.shape[1] != len(names):
        raise DimensionMismatch(f"{path}: header/row width mismatch")
    discrete = bool(np.all(arr == np.round(arr)) and arr.min() >= 0)
    if discrete:
        return Dataset(names, arr.astype(np.int64), True)
    return Dataset(names, arr, False)


def save_csv(path, names, values) -> None:
    values = np.asarray(values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in values:
            if np.issubdtype(values.dtype, np.integer):
                writer.writerow([int(x) for x in row])
            else:
                writer.writerow([f"{x:.10g}" for x in row])


def banded_graph(p: int, lags, rng) -> LabeledGraph:
    """Autoregressive-style graph: node i linked to the lag_i preceding nodes.

    Such graphs are chordal by construction (the natural order is a perfect
    elimination order).
    """
    lags = [int(l) for l in lags]
    edges = []
    for i in range(2, p + 1):
        lag = lags[rng.integers(len(lags))]
        for j in range(max(1, i - lag), i):
            edges.append((j, i))
    return LabeledGraph.from_edges(p, edges)


def gaussian_covariance(graph: LabeledGraph, rho: float, sigma2: float) -> np.ndarray:
    """Markov covariance: sigma^2 diagonal, rho*sigma^2 on graph edges,
    precision zero off the graph.

    Both displayed conditions hold simultaneously through the decomposable
    completion: clique blocks are intra-class, and entries outside the graph
    follow from conditional independence across the junction tree.
    """
    p = graph.node_count
    tree = junction_tree_of(graph)
    nbrs = tree.neighbors()
    cov = np.zeros((p, p))

    def fill_clique(nodes):
        idx = [v - 1 for v in nodes]
        for a in idx:
            cov[a, a] = sigma2
        for a in idx:
            for b in idx:
                if a != b:
                    cov[a, b] = rho * sigma2

    order = [0]
    parent = {0: None}
    seen = {0}
    queue = [0]
    while queue:
        i = queue.pop(0)
        for j in nbrs[i]:
            if j not in seen:
                seen.add(j)
                parent[j] = i
                order.append(j)
                queue.append(j)
    known: list[int] = []
    for idx in order:
        clique = sorted(tree.cliques[idx])
        par = parent[idx]
        sep = sorted(tree.cliques[idx] & tree.cliques[par]) if par is not None else []
        new = [v for v in clique if v not in sep]
        fill_clique(clique)
        outside = [u for u in known if u not in clique]
        if sep and outside:
            s = [v - 1 for v in sep]
            r = [v - 1 for v in new]
            o = [u - 1 for u in outside]
            s_inv = np.linalg.inv(cov[np.ix_(s, s)])
            cross = cov[np.ix_(r, s)] @ s_inv @ cov[np.ix_(s, o)]
            cov[np.ix_(r, o)] = cross
            cov[np.ix_(o, r)] = cross.T
        known.extend(new)
    for k in range(1, p + 1):
        sign, _ = np.linalg.slogdet(cov[:k, :k])
        if sign <= 0:
            raise NotPositiveDefinite(k)
    return cov


def gen_gaussian(p: int, n: int, rho: float, sigma2: float, lags, seed: int):
    """Zero-mean Gaussian sample from the banded-lag covariance model."""
    rng = np.random.default_rng(seed)
    graph = banded_graph(p, lags, rng)
    cov = gaussian_covariance(graph, rho, sigma2)
    chol = np.linalg.cholesky(cov)
    data = rng.standard_normal((n, p)) @ chol.T
    precision = np.linalg.inv(cov)
    achieved_zeros = int(
        sum(
            1
            for a in range(p)
            for b in range(a + 1, p)
            if not graph.has_edge(a + 1, b + 1) and abs(precision[a, b]) < 1e-9
        )
    )
    off_diag = p * (p - 1) // 2 - len(graph.edges)
    meta = {"precision_zero_fraction": achieved_zeros / off_diag if off_diag else 1.0}
    return data, graph, meta


def gen_discrete(graph: LabeledGraph, cardinalities, n: int, seed: int,
                 concentration: float = 1.0):
    """Sample a graph-Markov discrete model, then n observations from it.

    Clique marginals are drawn along a junction tree: the root clique table
    from a Dirichlet, every child conditionally given its separator cells, so
    the induced joint satisfies the clique-separator factorisation by
    construction.
    """
    if not is_decomposable(graph):
        raise NotDecomposable("generator requires a decomposable graph")
    rng = np.random.default_rng(seed)
    p = graph.node_count
    cards = [int(c) for c in cardinalities]
    if len(cards) != p:
        raise DimensionMismatch("one cardinality per node required")
    tree = junction_tree_of(graph)
    nbrs = tree.neighbors()
    k = len(tree.cliques)
    order = [0]
    parent = {0: None}
    seen = {0}
    queue = [0]
    while queue:
        i = queue.pop(0)
        for j in nbrs[i]:
            if j not in seen:
                seen.add(j)
                parent[j] = i
                order.append(j)
                queue.append(j)

    # conditional tables: clique -> {separator cell -> distribution over rest}
    tables = []
    scopes = []
    for idx in order:
        clique = sorted(tree.cliques[idx])
        par = parent[idx]
        sep = sorted(tree.cliques[idx] & tree.cliques[par]) if par is not None else []
        rest = [v for v in clique if v not in sep]
        shape_rest = [cards[v - 1] for v in rest]
        size_rest = int(np.prod(shape_rest)) if rest else 1
        size_sep = int(np.prod([cards[v - 1] for v in sep])) if sep else 1
        table = rng.dirichlet([concentration] * size_rest, size=size_sep)
        tables.append(table)
        scopes.append((sep, rest, shape_rest))

    data = np.zeros((n, p), dtype=np.int64)
    for row in range(n):
        values = {}
        for idx_pos, idx in enumerate(order):
            sep, rest, shape_rest = scopes[idx_pos]
            if not rest:
                continue
            sep_cell = 0
            for v in sep:
                sep_cell = sep_cell * cards[v - 1] + values[v]
            draw = rng.choice(len(tables[idx_pos][sep_cell]), p=tables[idx_pos][sep_cell])
            for v in reversed(rest):
                values[v] = int(draw % cards[v - 1])
                draw //= cards[v - 1]
        data[row] = [values[v] for v in range(1, p + 1)]
    return data


def random_decomposable_graph(p: int, alpha: float, beta: float, seed: int) -> LabeledGraph:
    """Random chordal graph grown one node at a time with the expander."""
    from .expander import ExpanderConfig, expand
    from .graphs import JunctionTree, graph_of

    rng = np.random.default_rng(seed)
    tree = JunctionTree((frozenset({1}),), frozenset())
    cfg = ExpanderConfig(alpha=alpha, beta=beta)
    for _ in range(p - 1):
        tree, _ = expand(tree, cfg, rng)
    return graph_of(tree)


def demo_15_node_topology() -> LabeledGraph:
    """Fixture for the 15-node discrete demo.

    The published structure is only available as a figure, so this bundled
    topology is an approximation with the same flavour: overlapping small
    cliques plus a few pendant nodes.
    """
    edges = [
        (1, 2), (2, 3), (1, 3),
        (3, 4), (4, 5), (3, 5),
        (5, 6), (6, 7), (5, 7),
        (7, 8), (8, 9),
        (9, 10), (10, 11), (9, 11),
        (11, 12), (12, 13),
        (13, 14), (13, 15), (14, 15),
    ]
    return LabeledGraph.from_edges(15, edges)
