"""Graph structures, chordality, canonical junction trees, serialization."""

from itertools import combinations

import pytest

from jtsmc.errors import NotDecomposable
from jtsmc.graphs import (
    JunctionTree,
    LabeledGraph,
    graph_of,
    is_decomposable,
    is_valid_junction_tree,
    junction_tree_of,
    maximal_cliques,
)

from conftest import graph, tree


def brute_force_chordal(g: LabeledGraph) -> bool:
    """Independent oracle: every simple cycle of length >= 4 has a chord."""
    nbrs = g.neighbors()

    def cycles_from(start):
        stack = [(start, [start])]
        while stack:
            node, path = stack.pop()
            for nxt in nbrs[node]:
                if nxt == start and len(path) >= 4:
                    yield path
                elif nxt not in path and nxt > start:
                    stack.append((nxt, path + [nxt]))

    for start in range(1, g.node_count + 1):
        for cycle in cycles_from(start):
            chords = [
                (a, b)
                for a, b in combinations(cycle, 2)
                if g.has_edge(a, b)
                and abs(cycle.index(a) - cycle.index(b)) not in (1, len(cycle) - 1)
            ]
            if not chords:
                return False
    return True


def all_graphs(p):
    slots = list(combinations(range(1, p + 1), 2))
    for mask in range(1 << len(slots)):
        yield LabeledGraph(
            p, frozenset(slots[i] for i in range(len(slots)) if mask >> i & 1)
        )


def test_triangle_is_chordal():
    assert is_decomposable(graph(3, (1, 2), (2, 3), (1, 3)))


def test_four_cycle_is_not_chordal():
    assert not is_decomposable(graph(4, (1, 2), (2, 3), (3, 4), (1, 4)))


def test_empty_graph_is_chordal():
    assert is_decomposable(graph(5))


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_chordality_matches_cycle_oracle(p):
    for g in all_graphs(p):
        assert is_decomposable(g) == brute_force_chordal(g), sorted(g.edges)


def test_chordality_matches_cycle_oracle_p5():
    for g in all_graphs(5):
        assert is_decomposable(g) == brute_force_chordal(g), sorted(g.edges)


def test_junction_tree_of_complete_graph():
    t = junction_tree_of(graph(3, (1, 2), (2, 3), (1, 3)))
    assert t.cliques == (frozenset({1, 2, 3}),)
    assert not t.edges


def test_junction_tree_of_path():
    t = junction_tree_of(graph(3, (1, 2), (2, 3)))
    assert set(t.cliques) == {frozenset({1, 2}), frozenset({2, 3})}
    assert t.separators() == [frozenset({2})]


def test_junction_tree_of_empty_graph_is_star_at_node_one():
    t = junction_tree_of(graph(3))
    assert set(t.cliques) == {frozenset({1}), frozenset({2}), frozenset({3})}
    one = t.cliques.index(frozenset({1}))
    nbrs = t.neighbors()
    assert sorted(len(nbrs[i]) for i in range(3)) == [1, 1, 2]
    assert len(nbrs[one]) == 2


def test_junction_tree_requires_chordal():
    with pytest.raises(NotDecomposable):
        junction_tree_of(graph(4, (1, 2), (2, 3), (3, 4), (1, 4)))


def test_graph_of_examples():
    t = tree([{1, 2}, {2, 3}], {(0, 1)})
    assert graph_of(t) == graph(3, (1, 2), (2, 3))
    t2 = tree([{1, 2, 3, 4}], set())
    assert len(graph_of(t2).edges) == 6
    t3 = tree([{1}, {2}, {3}], {(0, 1), (0, 2)})
    assert graph_of(t3) == graph(3)


@pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
def test_roundtrip_graph_tree_graph(p):
    for g in all_graphs(p):
        if not is_decomposable(g):
            continue
        t = junction_tree_of(g)
        assert is_valid_junction_tree(t)
        assert graph_of(t) == g


def test_canonical_tree_is_deterministic():
    g = graph(5, (1, 2), (2, 3), (3, 4))
    assert junction_tree_of(g) == junction_tree_of(g)
    assert junction_tree_of(g).to_json() == junction_tree_of(g).to_json()


def test_tree_equality_ignores_clique_order():
    a = tree([{1, 2}, {2, 3}], {(0, 1)})
    b = tree([{2, 3}, {1, 2}], {(0, 1)})
    assert a == b and hash(a) == hash(b)


def test_maximal_cliques_of_path():
    g = graph(4, (1, 2), (2, 3), (3, 4))
    assert set(maximal_cliques(g)) == {
        frozenset({1, 2}),
        frozenset({2, 3}),
        frozenset({3, 4}),
    }


def test_graph_json_roundtrip():
    g = graph(4, (1, 3), (2, 4))
    assert LabeledGraph.from_json(g.to_json()) == g
    assert LabeledGraph.from_json(g.to_json()).to_json() == g.to_json()


def test_tree_json_roundtrip():
    t = junction_tree_of(graph(5, (1, 2), (2, 3), (1, 3), (3, 4)))
    back = JunctionTree.from_json(t.to_json())
    assert back == t
    assert back.to_json() == t.to_json()


def test_graph_rejects_self_loop_and_range():
    with pytest.raises(ValueError):
        LabeledGraph.from_edges(3, [(1, 1)])
    with pytest.raises(ValueError):
        LabeledGraph.from_edges(3, [(1, 4)])
