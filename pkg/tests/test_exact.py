"""Ground-truth enumeration engines."""

import numpy as np
import pytest

from jtsmc.errors import TooLarge
from jtsmc.exact import (
    enumerate_decomposable,
    enumerate_junction_trees,
    exact_expansion_support,
    exact_posterior,
)
from jtsmc.graphs import graph_of, junction_tree_of
from jtsmc.scoring import UniformScore
from jtsmc.treecount import count_junction_trees

from conftest import graph, tree


def test_count_three_nodes():
    assert len(enumerate_decomposable(3)) == 8


def test_count_four_nodes_excludes_cycles():
    assert len(enumerate_decomposable(4)) == 61


def test_guard_rejects_large_p():
    with pytest.raises(TooLarge):
        enumerate_decomposable(7)


def test_override_allows_p7_signature():
    # only check that the override path is wired; do not run the enumeration
    import inspect

    from jtsmc import exact

    assert "allow_large" in inspect.signature(exact.enumerate_decomposable).parameters


def test_uniform_posterior_p3():
    post = exact_posterior(UniformScore(3), 3)
    assert len(post.graphs) == 8
    assert np.allclose(post.probabilities, 1 / 8)
    assert post.probabilities.sum() == pytest.approx(1.0, abs=1e-12)


def test_enumerate_junction_trees_complete_graph():
    g = graph(4, (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))
    assert len(enumerate_junction_trees(g)) == 1


def test_enumerate_junction_trees_empty3():
    assert len(enumerate_junction_trees(graph(3))) == 3


def test_enumeration_matches_mu_for_all_p4():
    for g in enumerate_decomposable(4):
        assert len(enumerate_junction_trees(g)) == count_junction_trees(g)


def test_mu_mass_identity_p4():
    # sum over graphs of mu equals the total number of junction trees
    total_mu = sum(count_junction_trees(g) for g in enumerate_decomposable(4))
    total_trees = sum(len(enumerate_junction_trees(g)) for g in enumerate_decomposable(4))
    assert total_mu == total_trees


def test_tree_law_pushforward_matches_posterior():
    post = exact_posterior(UniformScore(4), 4)
    law = post.tree_law()
    assert sum(prob for _, prob in law) == pytest.approx(1.0, abs=1e-12)
    mass = {}
    for t, prob in law:
        key = graph_of(t).edges
        mass[key] = mass.get(key, 0.0) + prob
    for g, prob in zip(post.graphs, post.probabilities):
        assert mass[g.edges] == pytest.approx(prob, abs=1e-12)


def test_exact_expansion_support_from_single_node():
    t1 = tree([{1}], set())
    assert len(exact_expansion_support(t1)) == 2


def test_exact_expansion_support_from_k2():
    t = tree([{1, 2}], set())
    support = exact_expansion_support(t)
    graphs = {graph_of(s).edges for s in support}
    assert graphs == {
        frozenset({(1, 2)}),
        frozenset({(1, 2), (1, 3)}),
        frozenset({(1, 2), (2, 3)}),
        frozenset({(1, 2), (1, 3), (2, 3)}),
    }
    assert all(len(exact_expansion_support(t)) >= 1 for t in support if t.node_count <= 4)


def test_exact_expansion_support_guard():
    t = junction_tree_of(graph(5, (1, 2), (2, 3), (3, 4), (4, 5)))
    with pytest.raises(TooLarge):
        exact_expansion_support(t)
