import numpy as np
import pytest

from jtsmc.graphs import LabeledGraph, JunctionTree


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def graph(p, *edges):
    return LabeledGraph.from_edges(p, list(edges))


def tree(cliques, edges):
    return JunctionTree(tuple(frozenset(c) for c in cliques), frozenset(edges))


@pytest.fixture(scope="session")
def czech_model():
    from jtsmc.data import czech_autoworkers
    from jtsmc.scoring import DirichletMultinomialScore

    data, names = czech_autoworkers()
    return DirichletMultinomialScore(data, [2] * 6, pseudo_count_total=1.0)
