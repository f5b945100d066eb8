"""Bayesian structure learning for decomposable graphical models.

Posterior sampling over chordal graphs via a temporal embedding into junction
trees on growing node subsets, driven by sequential Monte Carlo inside a
particle Gibbs sampler with systematic refreshment.
"""

from .graphs import (
    JunctionTree,
    LabeledGraph,
    graph_of,
    is_decomposable,
    junction_tree_of,
)
from .treecount import (
    clique_sep_symmetric_diff,
    count_junction_trees,
    mu_ratio,
    nu,
    separator_multiset,
)

__all__ = [
    "JunctionTree",
    "LabeledGraph",
    "graph_of",
    "is_decomposable",
    "junction_tree_of",
    "clique_sep_symmetric_diff",
    "count_junction_trees",
    "mu_ratio",
    "nu",
    "separator_multiset",
]

__version__ = "0.1.0"
