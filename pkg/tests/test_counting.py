"""Junction-tree counting, re-linking factors, mu ratios, deltas."""

import random
from fractions import Fraction
from itertools import combinations

import pytest

from jtsmc.errors import InconsistentExpansion, UnknownSeparator
from jtsmc.exact import (
    enumerate_decomposable,
    enumerate_junction_trees,
    exact_expansion_support,
)
from jtsmc.graphs import LabeledGraph, graph_of, is_decomposable, junction_tree_of
from jtsmc.treecount import (
    clique_sep_symmetric_diff,
    count_junction_trees,
    mu_ratio,
    nu,
    separator_multiset,
)

from conftest import graph, tree


def test_mu_complete_graph_is_one():
    for p in (2, 4, 6):
        edges = list(combinations(range(1, p + 1), 2))
        assert count_junction_trees(graph(p, *edges)) == 1


def test_mu_empty_graphs_match_cayley():
    assert count_junction_trees(graph(3)) == 3
    assert count_junction_trees(graph(4)) == 16  # 4^{4-2}


def test_mu_equals_enumeration_all_p4():
    for g in enumerate_decomposable(4):
        assert count_junction_trees(g) == len(enumerate_junction_trees(g))


def test_mu_equals_enumeration_random_p5_p6():
    rnd = random.Random(99)
    checked = 0
    slots5 = list(combinations(range(1, 6), 2))
    slots6 = list(combinations(range(1, 7), 2))
    while checked < 200:
        slots = slots5 if checked % 2 else slots6
        p = 5 if checked % 2 else 6
        g = LabeledGraph(p, frozenset(s for s in slots if rnd.random() < 0.45))
        if is_decomposable(g):
            assert count_junction_trees(g) == len(enumerate_junction_trees(g))
            checked += 1


def test_separator_multiset_is_tree_invariant():
    for g in enumerate_decomposable(4):
        trees = enumerate_junction_trees(g)
        reference = separator_multiset(trees[0])
        for t in trees[1:]:
            assert separator_multiset(t) == reference


def test_nu_forced_value_when_single_split():
    t = tree([{1, 2}, {2, 3}], {(0, 1)})
    assert nu(t, frozenset({2})) == 1


def test_nu_empty_separator_empty_graph():
    t = junction_tree_of(graph(3))
    assert nu(t, frozenset()) == 3


def test_nu_two_one_split():
    # separator {2} with one subtree holding two eligible cliques: 2 * 3^0
    t = tree([{1, 2}, {2, 3}, {2, 4}], {(0, 1), (1, 2)})
    assert nu(t, frozenset({2})) == 3  # sizes (1,1,1) at multiplicity 2
    t2 = tree([{1, 2}, {2, 3}, {2, 3, 4}], {(0, 2), (1, 2)})
    assert nu(t2, frozenset({2})) == 2  # sizes (2, 1)


def test_nu_unknown_separator_raises():
    t = tree([{1, 2}, {2, 3}], {(0, 1)})
    with pytest.raises(UnknownSeparator):
        nu(t, frozenset({9}))


def test_mu_ratio_examples():
    # single clique expanded by merging the new node: both mu = 1
    t1 = tree([{1, 2}], set())
    t2 = tree([{1, 2, 3}], set())
    assert mu_ratio(t1, t2, [frozenset({1, 2, 3})]) == 1

    # empty 2 -> empty 3: 1/3
    ta = junction_tree_of(graph(2))
    tb = junction_tree_of(graph(3))
    assert mu_ratio(ta, tb, [frozenset()]) == Fraction(1, 3)


def created_separators(t_next):
    """Separator values on edges incident to a clique holding the new node."""
    m1 = t_next.node_count
    return {
        t_next.cliques[i] & t_next.cliques[j]
        for i, j in t_next.edges
        if m1 in t_next.cliques[i] or m1 in t_next.cliques[j]
    }


@pytest.mark.parametrize("m", [2, 3, 4])
def test_mu_ratio_matches_direct_quotient_exhaustively(m):
    for g in enumerate_decomposable(m):
        for t in enumerate_junction_trees(g):
            for t2 in exact_expansion_support(t):
                ratio = mu_ratio(t, t2, created_separators(t2))
                direct = Fraction(
                    count_junction_trees(graph_of(t)),
                    count_junction_trees(graph_of(t2)),
                )
                assert ratio == direct


def test_mu_ratio_checks_restriction():
    t1 = tree([{1, 2}], set())
    bad = tree([{1}, {2}, {3}], {(0, 1), (1, 2)})
    with pytest.raises(InconsistentExpansion):
        mu_ratio(t1, bad, [frozenset()])


def test_symmetric_diff_identical_trees():
    t = junction_tree_of(graph(4, (1, 2), (2, 3)))
    cliques, seps = clique_sep_symmetric_diff(t, t)
    assert not cliques and not seps


def test_symmetric_diff_isolated_node():
    t_a = tree([{1, 2}], set())
    t_b = tree([{1, 2}, {3}], {(0, 1)})
    cliques, seps = clique_sep_symmetric_diff(t_a, t_b)
    assert cliques == {frozenset({3}): 1}
    assert seps == {frozenset(): 1}


def test_symmetric_diff_triangle_vs_path():
    t_path = tree([{1, 2}, {2, 3}], {(0, 1)})
    t_tri = tree([{1, 2, 3}], set())
    cliques, seps = clique_sep_symmetric_diff(t_path, t_tri)
    assert cliques == {
        frozenset({1, 2, 3}): 1,
        frozenset({1, 2}): -1,
        frozenset({2, 3}): -1,
    }
    assert seps == {frozenset({2}): -1}
