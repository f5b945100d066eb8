"""Counting and re-linking junction trees through their separators.

The junction trees of a decomposable graph factorise over distinct separator
values: cutting every tree edge carrying a value s leaves a partition of the
cliques into blocks that does not depend on the chosen tree, and any way of
re-linking the blocks through cliques containing s yields another junction
tree.  The number of re-linkings at s is the generalised-Cayley count

    nu(s) = (prod_j f_j) * (sum_j f_j)^(k-2),

with f_j the number of cliques containing s in block j, and the total number
of junction trees is the product of nu over distinct separators.  This module
implements those counts exactly (big integers), the per-value re-linking
("configurations") as sampleable/enumerable objects, and the incremental
quantities used by the sampler: mu ratios and clique/separator deltas.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .errors import InconsistentExpansion, UnknownSeparator
from .graphs import JunctionTree, LabeledGraph, canonical_tree, graph_of, _norm_edge


@lru_cache(maxsize=1 << 15)
def separator_multiset(t: JunctionTree) -> Counter:
    """Map separator value -> multiplicity.  Treat the result as read-only."""
    return Counter(t.separators())


def separator_blocks(t: JunctionTree, s: frozenset):
    """Cut every edge with separator s.

    Returns (blocks, eligible): ``blocks`` partitions clique indices by the
    resulting components, ``eligible`` lists, per block, the indices of
    cliques containing s (the re-linking ports).  Both are sorted for
    determinism.  The partition is a graph invariant (tree independent), but
    the result is expressed in clique indices, which follow the tuple order
    while tree equality deliberately does not; hence the memo lives on the
    instance instead of a shared cache.
    """
    hit = t._memo.get(("blocks", s))
    if hit is not None:
        return hit
    k = len(t.cliques)
    nbrs = {i: [] for i in range(k)}
    for i, j in t.edges:
        if t.cliques[i] & t.cliques[j] != s:
            nbrs[i].append(j)
            nbrs[j].append(i)
    unseen = set(range(k))
    blocks = []
    while unseen:
        root = min(unseen)
        comp = {root}
        stack = [root]
        unseen.discard(root)
        while stack:
            i = stack.pop()
            for j in nbrs[i]:
                if j in unseen:
                    unseen.discard(j)
                    comp.add(j)
                    stack.append(j)
        blocks.append(sorted(comp))
    blocks.sort()
    eligible = [[i for i in blk if s <= t.cliques[i]] for blk in blocks]
    t._memo[("blocks", s)] = (blocks, eligible)
    return blocks, eligible


def linking_count(port_counts: list[int]) -> int:
    """Generalised Cayley count (prod f_j) (sum f_j)^(k-2); 1 when k <= 1."""
    k = len(port_counts)
    if k <= 1:
        return 1
    total = sum(port_counts)
    prod = 1
    for f in port_counts:
        prod *= f
    return prod * total ** (k - 2)


def nu(t: JunctionTree, s: frozenset) -> int:
    """Number of junction trees obtained by re-linking t at separator s."""
    if s not in separator_multiset(t):
        raise UnknownSeparator(f"{sorted(s)} is not a separator of the tree")
    _, eligible = separator_blocks(t, s)
    return linking_count([len(e) for e in eligible])


@lru_cache(maxsize=1 << 16)
def _mu_cached(node_count: int, edges: frozenset) -> int:
    t = canonical_tree(LabeledGraph(node_count, edges))
    result = 1
    for s in set(t.separators()):
        result *= nu(t, s)
    return result


def count_junction_trees(g: LabeledGraph) -> int:
    """mu(g): exact number of junction tree representations."""
    return _mu_cached(g.node_count, g.edges)


def mu_of_tree(t: JunctionTree) -> int:
    return _mu_cached(t.node_count, graph_of(t).edges)


@lru_cache(maxsize=1 << 15)
def log_mu_of_tree(t: JunctionTree) -> float:
    import math

    return math.log(_mu_cached(t.node_count, graph_of(t).edges))


def mu_ratio(t_m: JunctionTree, t_next: JunctionTree, new_separators) -> Fraction:
    """mu(g_m)/mu(g_{m+1}) via the separator factorisation.

    ``new_separators`` holds the separator values created by the expansion;
    only values contained in one of them contribute a nu factor, everything
    else cancels between numerator and denominator.
    """
    g_m = graph_of(t_m)
    g_next = graph_of(t_next)
    if g_next.restrict(g_m.node_count) != g_m:
        raise InconsistentExpansion("target does not restrict to the source graph")
    stars = [frozenset(s) for s in new_separators]
    num = 1
    for s in set(t_m.separators()):
        if any(s <= s2 for s2 in stars):
            num *= nu(t_m, s)
    den = 1
    for s in set(t_next.separators()):
        if any(s <= s2 for s2 in stars):
            den *= nu(t_next, s)
    return Fraction(num, den)


def clique_sep_symmetric_diff(t_a: JunctionTree, t_b: JunctionTree):
    """Signed symmetric differences, +1 for elements of t_b.

    Cliques: plain set difference with signs.  Separators: multiset
    difference, value -> signed multiplicity change (mult_b - mult_a).
    """
    cliques_a, cliques_b = set(t_a.cliques), set(t_b.cliques)
    clique_delta = {c: 1 for c in cliques_b - cliques_a}
    clique_delta.update({c: -1 for c in cliques_a - cliques_b})
    seps_a, seps_b = separator_multiset(t_a), separator_multiset(t_b)
    sep_delta = {}
    for s in set(seps_a) | set(seps_b):
        d = seps_b[s] - seps_a[s]
        if d:
            sep_delta[s] = d
    return clique_delta, sep_delta


# --- re-linking configurations ------------------------------------------------
#
# A configuration at separator value s is the set of tree edges carrying s,
# written as port pairs (clique index u in one block, v in another).  Port
# trees over the blocks biject with (root port per block, Pruefer sequence of
# k-2 ports): a block of degree d contributes d-1 sequence entries plus its
# root port, which matches the generalised-Cayley count exactly.


def config_edges(t: JunctionTree, s: frozenset):
    """Edges of t carrying separator value s, as clique-frozenset pairs."""
    return frozenset(
        frozenset((t.cliques[i], t.cliques[j]))
        for i, j in t.edges
        if t.cliques[i] & t.cliques[j] == s
    )


def _decode_port_pruefer(k: int, block_of: dict, roots: list[int], seq: list[int]):
    """Standard Pruefer decode at block level; ports ride along."""
    if k == 1:
        return []
    degree = [1] * k
    for port in seq:
        degree[block_of[port]] += 1
    edges = []
    used = [False] * k
    for port in seq:
        b = block_of[port]
        leaf = min(i for i in range(k) if degree[i] == 1 and not used[i])
        edges.append((roots[leaf], port))
        used[leaf] = True
        degree[leaf] -= 1
        degree[b] -= 1
    rest = [i for i in range(k) if not used[i] and degree[i] == 1]
    edges.append((roots[rest[0]], roots[rest[1]]))
    return edges


def sample_linking(eligible: list[list[int]], rng) -> list[tuple[int, int]]:
    """Uniform port tree over the blocks; returns index pairs."""
    k = len(eligible)
    if k == 1:
        return []
    block_of = {}
    all_ports = []
    for b, ports in enumerate(eligible):
        for u in ports:
            block_of[u] = b
            all_ports.append(u)
    roots = [ports[rng.integers(len(ports))] for ports in eligible]
    seq = [all_ports[rng.integers(len(all_ports))] for _ in range(k - 2)]
    return _decode_port_pruefer(k, block_of, roots, seq)


def enumerate_linkings(eligible: list[list[int]]):
    """All port trees over the blocks (bijective with roots x sequences)."""
    k = len(eligible)
    if k == 1:
        yield []
        return
    block_of = {}
    all_ports = []
    for b, ports in enumerate(eligible):
        for u in ports:
            block_of[u] = b
            all_ports.append(u)
    for roots in product(*eligible):
        for seq in product(all_ports, repeat=k - 2):
            yield _decode_port_pruefer(k, block_of, list(roots), list(seq))


def count_linkings_with_forest(eligible: list[list[int]], required) -> int:
    """Number of port trees containing every required port edge.

    ``required`` is an iterable of (u, v) clique-index pairs.  Contract the
    touched blocks; the remaining freedom is a port tree on the merged blocks
    with the full port sets, giving (prod f_merged) (sum f)^(k'-2).  Returns 0
    if the required edges are invalid (cycle, same block, ineligible port).
    """
    k = len(eligible)
    block_of = {}
    for b, ports in enumerate(eligible):
        for u in ports:
            block_of[u] = b
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    req = set()
    for u, v in required:
        if u not in block_of or v not in block_of:
            return 0
        bu, bv = find(block_of[u]), find(block_of[v])
        if bu == bv:
            return 0
        parent[bu] = bv
        req.add((u, v))
    groups = {}
    for b in range(k):
        groups.setdefault(find(b), []).append(b)
    merged_counts = [sum(len(eligible[b]) for b in grp) for grp in groups.values()]
    return linking_count(merged_counts)


def randomize_at_separator(t: JunctionTree, s: frozenset, rng) -> JunctionTree:
    """Redraw the linking structure at value s uniformly; other edges kept."""
    blocks, eligible = separator_blocks(t, s)
    keep = frozenset(
        (i, j) for i, j in t.edges if t.cliques[i] & t.cliques[j] != s
    )
    new = frozenset(_norm_edge(u, v) for u, v in sample_linking(eligible, rng))
    return JunctionTree(t.cliques, keep | new)
