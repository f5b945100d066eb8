"""Junction-tree expansion kernel and its exact reverse.

Forward move from a tree on m nodes to one on m+1 nodes:

1. With probability ``beta`` the new node is isolated: its singleton clique is
   inserted and the empty-separator linking structure is redrawn uniformly.
2. Otherwise an anchor clique is drawn uniformly, a connected clique subtree
   is grown by independent ``alpha``-Bernoulli trials on the frontier edges,
   and every chosen clique Q contributes a neighbour subset S_Q drawn
   uniformly from {S : req(Q) <= S <= Q, S nonempty, S not an incident
   intra-subtree separator}, where req(Q) is the union of the intra-subtree
   separators at Q.  A deterministic surgery splices the new cliques
   S_Q + {m+1} into the tree, and the linking structure at every *affected*
   separator value is redrawn uniformly.

A separator value is affected when its multiplicity changes, when it is
contained in a newly attached (non-swallowing) clique, or when its block
partition changes; everything else is carried over from the source tree
unchanged.  This makes the transition density exactly computable (a sum over
host assignments times re-linking factors) and gives the reverse kernel a
closed-form support: the trees of the restricted graph that agree with the
target off the affected values and admit a valid host assignment.  Reverse
support sizes come from inclusion-exclusion over (assignment, shape) events
with the generalised-Cayley contraction count.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from .errors import EmptySupport, InconsistentExpansion
from .graphs import JunctionTree, canonical_tree, graph_of, _norm_edge
from .treecount import (
    count_linkings_with_forest,
    enumerate_linkings,
    linking_count,
    sample_linking,
    separator_blocks,
    separator_multiset,
)


EMPTY = frozenset()


@dataclass(frozen=True)
class ExpanderConfig:
    alpha: float
    beta: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in the open interval (0,1)")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in the open interval (0,1)")


@dataclass(frozen=True)
class ExpansionMove:
    """Record of the expander's random choices; replay is deterministic."""

    isolated: bool
    anchor: frozenset | None
    subtree: frozenset
    subsets: tuple  # ((clique, subset), ...)
    linkings: tuple  # ((separator value, frozenset of clique pairs), ...)


def _sorted_values(values):
    return sorted(values, key=lambda s: (len(s), sorted(s)))


class _Scratch:
    """Tree under construction: duck-compatible with JunctionTree where the
    expansion internals need it, without the construction/hashing overhead."""

    __slots__ = ("cliques", "edges", "node_count", "_memo")

    def __init__(self, cliques, edges, node_count):
        self.cliques = cliques
        self.edges = edges
        self.node_count = node_count
        self._memo = {}

    def separators(self):
        return [self.cliques[i] & self.cliques[j] for i, j in self.edges]


# --- target decomposition ------------------------------------------------------


class _TargetData:
    """Everything about t_next that the reverse direction needs."""

    def __init__(self, t_next: JunctionTree):
        self.t_next = t_next
        self.m1 = t_next.node_count
        self.new_cliques = [c for c in t_next.cliques if self.m1 in c]
        self.old_cliques = [c for c in t_next.cliques if self.m1 not in c]
        self.ds = [c - {self.m1} for c in self.new_cliques]
        self.isolated = len(self.new_cliques) == 1 and not self.ds[0]
        self.swallowed = frozenset(
            d for d in self.ds if d and not any(d < o for o in self.old_cliques)
        )
        self.kept_new = [
            c for c, d in zip(self.new_cliques, self.ds) if d not in self.swallowed
        ]
        self.g_cliques = list(self.old_cliques) + _sorted_values(self.swallowed)
        # image of a restricted-graph clique inside t_next
        self.image = {q: q for q in self.old_cliques}
        for d in self.swallowed:
            self.image[d] = d | {self.m1}


def _affected_values(source_tree: JunctionTree, data: _TargetData) -> set[frozenset]:
    """Separator values whose linking structure the expansion may touch."""
    t_next = data.t_next
    mult_src = separator_multiset(source_tree)
    if isinstance(t_next, JunctionTree):
        mult_next = separator_multiset(t_next)
    else:
        mult_next = Counter(t_next.separators())
    affected = set()
    for v in set(mult_src) | set(mult_next):
        if mult_src[v] != mult_next[v]:
            affected.add(v)
        elif any(v <= c for c in data.kept_new):
            affected.add(v)
        else:
            if _block_partition(source_tree, v, data.image) != _block_partition(
                t_next, v, None
            ):
                affected.add(v)
    return affected


def _block_partition(t: JunctionTree, v: frozenset, image):
    blocks, eligible = separator_blocks(t, v)
    out = set()
    for ports in eligible:
        if image is None:
            out.add(frozenset(t.cliques[i] for i in ports))
        else:
            out.add(frozenset(image[t.cliques[i]] for i in ports))
    return frozenset(out)


def _edges_off(t: JunctionTree, affected, image) -> frozenset:
    out = set()
    for i, j in t.edges:
        a, b = t.cliques[i], t.cliques[j]
        if (a & b) not in affected:
            if image is not None:
                a, b = image[a], image[b]
            out.add(frozenset((a, b)))
    return frozenset(out)


# --- forward move ---------------------------------------------------------------


def _grow_subtree(t: JunctionTree, anchor: int, alpha: float, rng) -> set[int]:
    # each excluded clique borders the growing subtree through at most one
    # tree edge, so every frontier edge is offered exactly once
    nbrs = t.neighbors()
    included = {anchor}
    queue = [anchor]
    while queue:
        i = queue.pop(0)
        for j in sorted(nbrs[i]):
            if j in included:
                continue
            if rng.random() < alpha:
                included.add(j)
                queue.append(j)
    return included


def _subset_choice_count(clique: frozenset, req: frozenset, banned: set) -> int:
    n = 1 << len(clique - req)
    if req in banned or req == EMPTY:
        n -= 1
    return n


def _sample_subset(clique, req, banned, rng):
    free = sorted(clique - req)
    while True:
        chosen = frozenset(v for v in free if rng.random() < 0.5) | req
        if chosen and chosen not in banned:
            return chosen


def _surgery(t: JunctionTree, subtree: set[int], subsets: dict[int, frozenset]):
    """Deterministic splice of the new cliques; returns (tree, image)."""
    m1 = t.node_count + 1
    node_clique: list[frozenset] = []
    index_of_old = {}
    new_index_of = {}
    image = {}
    for i, clique in enumerate(t.cliques):
        if i in subtree and subsets[i] == clique:
            node_clique.append(clique | {m1})
            image[clique] = clique | {m1}
        else:
            node_clique.append(clique)
            image[clique] = clique
        index_of_old[i] = len(node_clique) - 1
    for i in sorted(subtree):
        if subsets[i] != t.cliques[i]:
            node_clique.append(subsets[i] | {m1})
            new_index_of[i] = len(node_clique) - 1
        else:
            new_index_of[i] = index_of_old[i]
    edges = set()
    for i, j in t.edges:
        if i in subtree and j in subtree:
            edges.add(_norm_edge(new_index_of[i], new_index_of[j]))
        else:
            edges.add(_norm_edge(index_of_old[i], index_of_old[j]))
    for i in subtree:
        if subsets[i] != t.cliques[i]:
            edges.add(_norm_edge(index_of_old[i], new_index_of[i]))
    scratch = _Scratch(tuple(node_clique), frozenset(edges), m1)
    return scratch, image


def _attach_singleton(t: JunctionTree) -> _Scratch:
    m1 = t.node_count + 1
    cliques = t.cliques + (frozenset({m1}),)
    edges = set(t.edges)
    edges.add(_norm_edge(0, len(cliques) - 1))
    return _Scratch(cliques, frozenset(edges), m1)


@lru_cache(maxsize=1 << 14)
def _move_data(t: JunctionTree, pairs):
    """Deterministic part of a move: surgery output and re-linking slots.

    ``pairs`` is a frozenset of (clique, subset) choices, or None for the
    isolation branch.  The result lives entirely in the scratch tree's own
    index space, so sharing it between equal trees with permuted clique
    tuples is safe.
    """
    if pairs is None:
        base = _attach_singleton(t)
        affected = {EMPTY}
    else:
        by_clique = dict(pairs)
        subtree = {i for i, c in enumerate(t.cliques) if c in by_clique}
        base, _ = _surgery(t, subtree, {i: by_clique[t.cliques[i]] for i in subtree})
        affected = _affected_values(t, _TargetData(base))
    touched = tuple(_sorted_values(affected & set(base.separators())))
    touched_set = set(touched)
    keep = frozenset(
        (i, j)
        for i, j in base.edges
        if (base.cliques[i] & base.cliques[j]) not in touched_set
    )
    eligibles = tuple(separator_blocks(base, v)[1] for v in touched)
    return tuple(base.cliques), keep, touched, eligibles


def _finish_move(move_data, rng):
    cliques, keep, touched, eligibles = move_data
    new_edges = []
    linkings = []
    for v, eligible in zip(touched, eligibles):
        drawn = [_norm_edge(u, w) for u, w in sample_linking(eligible, rng)]
        new_edges.extend(drawn)
        linkings.append(
            (v, frozenset(frozenset((cliques[u], cliques[w])) for u, w in drawn))
        )
    t_next = JunctionTree(cliques, keep | frozenset(new_edges))
    return t_next, tuple(linkings)


def expand(t: JunctionTree, cfg: ExpanderConfig, rng):
    """One draw from the expansion kernel; returns (t_next, move)."""
    k = len(t.cliques)
    if rng.random() < cfg.beta:
        t_next, linkings = _finish_move(_move_data(t, None), rng)
        return t_next, ExpansionMove(True, None, frozenset(), (), linkings)
    anchor = int(rng.integers(k))
    subtree = _grow_subtree(t, anchor, cfg.alpha, rng)
    req = {i: EMPTY for i in subtree}
    banned = {i: {EMPTY} for i in subtree}
    for i, j in t.edges:
        if i in subtree and j in subtree:
            sep = t.cliques[i] & t.cliques[j]
            req[i] = req[i] | sep
            req[j] = req[j] | sep
            banned[i].add(sep)
            banned[j].add(sep)
    pairs = frozenset(
        (t.cliques[i], _sample_subset(t.cliques[i], req[i], banned[i], rng))
        for i in subtree
    )
    t_next, linkings = _finish_move(_move_data(t, pairs), rng)
    move = ExpansionMove(
        False,
        t.cliques[anchor],
        frozenset(t.cliques[i] for i in subtree),
        tuple(sorted(pairs, key=lambda cs: sorted(cs[0]))),
        linkings,
    )
    return t_next, move


def replay(t: JunctionTree, move: ExpansionMove) -> JunctionTree:
    """Deterministically reproduce the move's target tree."""
    if move.isolated:
        base = _attach_singleton(t)
    else:
        subsets = dict(move.subsets)
        subtree = {i for i, c in enumerate(t.cliques) if c in move.subtree}
        base, _ = _surgery(t, subtree, {i: subsets[t.cliques[i]] for i in subtree})
    cliques = tuple(base.cliques)
    clique_index = {c: i for i, c in enumerate(cliques)}
    edges = set(base.edges)
    for value, pairs in move.linkings:
        edges = {
            (i, j) for i, j in edges if cliques[i] & cliques[j] != value
        }
        edges.update(
            _norm_edge(clique_index[a], clique_index[b])
            for a, b in (tuple(pair) for pair in pairs)
        )
    return JunctionTree(cliques, frozenset(edges))


# --- exact transition density ---------------------------------------------------


def _check_restriction(t: JunctionTree, t_next: JunctionTree):
    if t_next.node_count != t.node_count + 1:
        raise InconsistentExpansion("target must have exactly one more node")
    if graph_of(t_next).restrict(t.node_count) != graph_of(t):
        raise InconsistentExpansion("target graph does not restrict to the source")


def _host_assignments(data: _TargetData, cliques: tuple):
    """All maps from non-clique neighbourhood pieces to host cliques."""
    index_of = {c: i for i, c in enumerate(cliques)}
    fixed = []
    for d in data.swallowed:
        if d not in index_of:
            return
        fixed.append((d, index_of[d]))
    loose = [d for d in data.ds if d and d not in data.swallowed]
    candidate_lists = []
    for d in loose:
        cands = [i for i, q in enumerate(cliques) if d < q]
        if not cands:
            return
        candidate_lists.append(cands)
    for combo in product(*candidate_lists):
        assignment = dict(fixed)
        assignment.update(zip(loose, combo))
        if len(set(assignment.values())) != len(assignment):
            continue
        yield assignment


def _move_probability(t: JunctionTree, hosts: dict[int, frozenset], cfg) -> float:
    """Probability of growing exactly this host subtree with these subsets.

    ``hosts`` maps clique index -> assigned subset.  Returns 0 when the hosts
    are not a connected subtree of t or a subset constraint fails.
    """
    k = len(t.cliques)
    members = set(hosts)
    intra = [(i, j) for i, j in t.edges if i in members and j in members]
    if len(intra) != len(members) - 1:
        return 0.0
    req = {i: EMPTY for i in members}
    banned = {i: {EMPTY} for i in members}
    boundary = 0
    for i, j in t.edges:
        inside = (i in members) + (j in members)
        if inside == 1:
            boundary += 1
        elif inside == 2:
            sep = t.cliques[i] & t.cliques[j]
            req[i] = req[i] | sep
            req[j] = req[j] | sep
            banned[i].add(sep)
            banned[j].add(sep)
    prob = len(members) / k
    prob *= cfg.alpha ** (len(members) - 1) * (1.0 - cfg.alpha) ** boundary
    for i in members:
        subset = hosts[i]
        if not (req[i] <= subset) or subset in banned[i]:
            return 0.0
        prob /= _subset_choice_count(t.cliques[i], req[i], banned[i])
    return prob


@lru_cache(maxsize=1 << 15)
def _expand_density_cached(t, t_next, cfg) -> float:
    data = _TargetData(t_next)
    affected = _affected_values(t, data)
    if _edges_off(t, affected, data.image) != _edges_off(t_next, affected, None):
        return 0.0
    relink = 1.0
    next_values = set(t_next.separators())
    for v in affected & next_values:
        _, eligible = separator_blocks(t_next, v)
        relink /= linking_count([len(e) for e in eligible])
    if data.isolated:
        return cfg.beta * relink
    total = 0.0
    for assignment in _host_assignments(data, t.cliques):
        hosts = {idx: d for d, idx in assignment.items()}
        total += _move_probability(t, hosts, cfg)
    return (1.0 - cfg.beta) * total * relink


def expand_density(t: JunctionTree, t_next: JunctionTree, cfg: ExpanderConfig) -> float:
    """Exact probability that expand(t, cfg) returns t_next."""
    _check_restriction(t, t_next)
    return _expand_density_cached(t, t_next, cfg)


# --- reverse kernel ---------------------------------------------------------------


def _spanning_trees(n: int, allowed, cap: int = 50000):
    """All spanning trees over nodes 0..n-1 using the allowed edge list.

    ``allowed`` holds (a, b, payload) triples; payloads ride along.  Standard
    contraction-deletion recursion, each tree produced exactly once.
    """
    results: list[tuple] = []

    def rec(labels, edges, chosen):
        distinct = len(set(labels))
        if distinct == 1:
            results.append(tuple(chosen))
            if len(results) > cap:
                raise NotImplementedError(
                    f"spanning-tree enumeration beyond {cap} shapes"
                )
            return
        if len(edges) < distinct - 1:
            return
        a, b, payload = edges[0]
        rest = edges[1:]
        # include: contract b's class into a's
        ra, rb = labels[a], labels[b]
        merged = [ra if x == rb else x for x in labels]
        kept = [
            (u, v, pl) for u, v, pl in rest if merged[u] != merged[v]
        ]
        chosen.append((a, b, payload))
        rec(merged, kept, chosen)
        chosen.pop()
        # exclude: drop the edge, but only if the graph can stay connected
        rec(labels, rest, chosen)

    edges = [(a, b, payload) for a, b, payload in allowed]
    rec(list(range(n)), edges, [])
    return results


def _group_by_shared_values(events):
    """Connected components of events under the shares-a-value relation."""
    groups: list[tuple[set, list]] = []
    for ev in events:
        values = {v for v, _ in ev}
        merged_values, merged_events = set(values), [ev]
        rest = []
        for gv, ge in groups:
            if gv & values:
                merged_values |= gv
                merged_events.extend(ge)
            else:
                rest.append((gv, ge))
        rest.append((merged_values, merged_events))
        groups = rest
    return [ge for _, ge in groups]


class _ReverseProblem:
    """Shared setup for collapse support, its size, and uniform sampling."""

    def __init__(self, t_next: JunctionTree):
        self.data = _TargetData(t_next)
        self.m = t_next.node_count - 1
        g = graph_of(t_next).restrict(self.m)
        self.g = g
        self.base = canonical_tree(g)
        self.cliques = self.base.cliques
        self.index_of = {c: i for i, c in enumerate(self.cliques)}
        self.affected = _affected_values(self.base, self.data)
        self.fixed_pairs = _edges_off(t_next, self.affected, None)
        mult_g = separator_multiset(self.base)
        self.aff_g = _sorted_values(v for v in self.affected if mult_g[v] > 0)
        self.blocks = {}
        for v in self.aff_g:
            blocks, eligible = separator_blocks(self.base, v)
            self.blocks[v] = eligible
        self.fixed_edges = set()
        for pair in self.fixed_pairs:
            a, b = tuple(pair)
            a0 = a - {t_next.node_count} if t_next.node_count in a else a
            b0 = b - {t_next.node_count} if t_next.node_count in b else b
            self.fixed_edges.add(_norm_edge(self.index_of[a0], self.index_of[b0]))
        self._forest_counts: dict = {}
        self.events = self._events()

    def _allowed_host_edges(self, hosts, subset_of):
        """Host pairs usable inside the grown subtree.

        An edge is usable when its separator sits inside both neighbour
        subsets, differs from both (the banned rule is edge-local), and is
        either re-linkable at an affected coordinate or already fixed.
        """
        allowed = []
        for a in range(len(hosts)):
            for b in range(a + 1, len(hosts)):
                u, w = hosts[a], hosts[b]
                sep = self.cliques[u] & self.cliques[w]
                if not (sep <= subset_of[u] and sep <= subset_of[w]):
                    continue
                if sep == subset_of[u] or sep == subset_of[w]:
                    continue
                if sep in self.affected:
                    if self._forest_count(sep, [_norm_edge(u, w)]) == 0:
                        continue
                    allowed.append((a, b, (sep, _norm_edge(u, w))))
                elif _norm_edge(u, w) in self.fixed_edges:
                    allowed.append((a, b, None))
        return allowed

    def _events(self):
        """Per host assignment, the list of realisable subtree shapes.

        Each shape is a frozenset of (value, port pair) requirements on the
        affected coordinates; fixed edges impose nothing.  Shapes of one
        assignment have pairwise disjoint config sets (two different induced
        subtrees cannot coexist), so their counts add.  Returns None in the
        isolated case.
        """
        data = self.data
        if data.isolated:
            return None
        assignments = []
        for assignment in _host_assignments(data, self.cliques):
            pieces = list(assignment.items())
            hosts = [idx for _, idx in pieces]
            if len(hosts) == 1:
                assignments.append([frozenset()])
                continue
            subset_of = {idx: d for d, idx in pieces}
            allowed = self._allowed_host_edges(hosts, subset_of)
            shapes = {
                frozenset(req for a, b, req in tree_edges if req is not None)
                for tree_edges in _spanning_trees(len(hosts), allowed)
            }
            if shapes:
                assignments.append(sorted(shapes, key=self._event_key))
        return assignments

    def _count(self, requirements) -> int:
        by_value = {v: [] for v in self.aff_g}
        for v, edge in requirements:
            by_value[v].append(edge)
        out = 1
        for v in self.aff_g:
            out *= count_linkings_with_forest(self.blocks[v], by_value[v])
            if out == 0:
                return 0
        return out

    @staticmethod
    def _event_key(ev):
        return sorted((sorted(v), edge) for v, edge in ev)

    def _flat_events(self):
        return {shape for shapes in self.events for shape in shapes}

    def _minimal_events(self):
        """Positive-count, subset-minimal events (supersets are redundant)."""
        alive = [ev for ev in self._flat_events() if self._count(ev) > 0]
        alive.sort(key=lambda e: (len(e), self._event_key(e)))
        minimal = []
        for ev in alive:
            if not any(kept <= ev for kept in minimal):
                minimal.append(ev)
        return minimal

    def _forest_count(self, value, edges) -> int:
        key = (value, frozenset(edges))
        hit = self._forest_counts.get(key)
        if hit is None:
            hit = count_linkings_with_forest(self.blocks[value], list(edges))
            self._forest_counts[key] = hit
        return hit

    def _union_count(self, events, values) -> int:
        """|union of the events' config sets| over the given coordinates."""
        total = 0
        for mask in range(1, 1 << len(events)):
            by_value: dict = {}
            for b in range(len(events)):
                if mask >> b & 1:
                    for v, edge in events[b]:
                        by_value.setdefault(v, set()).add(edge)
            term = 1
            for v in values:
                term *= self._forest_count(v, by_value.get(v, ()))
                if term == 0:
                    break
            total += term if bin(mask).count("1") % 2 == 1 else -term
        return total

    def size(self) -> int:
        base_total = self._count([])
        if self.events is None:
            return base_total
        if not self.events:
            return 0
        if any(frozenset() in shapes for shapes in self.events):
            return base_total
        if len(self.events) == 1:
            # induced shapes of one assignment exclude each other
            return sum(self._count(shape) for shape in self.events[0])
        events = self._minimal_events()
        if not events:
            return 0
        if base_total <= 256:
            return self._size_by_enumeration(events)
        # events touching disjoint coordinate sets are independent: the
        # avoid-all counts multiply across groups
        groups = _group_by_shared_values(events)
        avoid_all = 1
        touched = set()
        for group in groups:
            values = sorted({v for ev in group for v, _ in ev},
                            key=lambda s: (len(s), sorted(s)))
            touched |= set(values)
            group_base = 1
            for v in values:
                group_base *= self._forest_count(v, ())
            if len(group) > 16:
                raise NotImplementedError(
                    f"inclusion-exclusion over {len(group)} coupled expansion events"
                )
            avoid_all *= group_base - self._union_count(group, values)
        for v in self.aff_g:
            if v not in touched:
                avoid_all *= self._forest_count(v, ())
        return base_total - avoid_all

    def _size_by_enumeration(self, events) -> int:
        total = 0
        for linkings in self._all_linkings():
            realized = {(v, e) for v in self.aff_g for e in linkings[v]}
            if any(ev <= realized for ev in events):
                total += 1
        return total

    def _all_linkings(self):
        options = [
            [
                [_norm_edge(u, w) for u, w in link]
                for link in enumerate_linkings(self.blocks[v])
            ]
            for v in self.aff_g
        ]
        for combo in product(*options):
            yield dict(zip(self.aff_g, combo))

    def materialize(self, linkings: dict) -> JunctionTree:
        edges = set(self.fixed_edges)
        for v in self.aff_g:
            edges.update(_norm_edge(u, w) for u, w in linkings[v])
        return JunctionTree(self.cliques, frozenset(edges))

    def satisfied(self, linkings: dict) -> bool:
        if self.events is None:
            return True
        realized = {
            (v, edge) for v in self.aff_g for edge in linkings[v]
        }
        return any(
            any(shape <= realized for shape in shapes) for shapes in self.events
        )

    def sample(self, rng) -> JunctionTree:
        for _ in range(200):
            linkings = {
                v: [_norm_edge(u, w) for u, w in sample_linking(self.blocks[v], rng)]
                for v in self.aff_g
            }
            if self.satisfied(linkings):
                return self.materialize(linkings)
        return self._sample_by_decomposition(rng)

    def _sample_by_decomposition(self, rng) -> JunctionTree:
        """Exact uniform draw via sequential union decomposition."""
        events = self._minimal_events()
        sizes = []
        for j in range(len(events)):
            inner = 0
            for mask in range(1 << j):
                merged = set(events[j])
                for b in range(j):
                    if mask >> b & 1:
                        merged |= events[b]
                term = self._count(merged)
                inner += term if bin(mask).count("1") % 2 == 0 else -term
            sizes.append(inner)
        total = sum(sizes)
        if total <= 0:
            raise EmptySupport("reverse kernel support is empty")
        pick = int(rng.integers(total))
        j = 0
        while pick >= sizes[j]:
            pick -= sizes[j]
            j += 1
        required = {v: [] for v in self.aff_g}
        for v, edge in events[j]:
            required[v].append(edge)
        while True:
            linkings = {}
            for v in self.aff_g:
                extra = _sample_linking_with_forest(self.blocks[v], required[v], rng)
                linkings[v] = required[v] + extra
            realized = {(v, e) for v in self.aff_g for e in linkings[v]}
            if any(ev <= realized for ev in events[:j]):
                continue
            return self.materialize(linkings)


def _sample_linking_with_forest(eligible, required, rng):
    """Uniform linking conditional on containing the required port edges."""
    if not required:
        return [_norm_edge(u, w) for u, w in sample_linking(eligible, rng)]
    port_block = {}
    for b, ports in enumerate(eligible):
        for u in ports:
            port_block[u] = b
    parent = list(range(len(eligible)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, w in required:
        parent[find(port_block[u])] = find(port_block[w])
    groups = {}
    for b in range(len(eligible)):
        groups.setdefault(find(b), []).append(b)
    merged = [sorted(sum((eligible[b] for b in grp), [])) for grp in groups.values()]
    return [_norm_edge(u, w) for u, w in sample_linking(merged, rng)]


@lru_cache(maxsize=1 << 12)
def _reverse_problem(t_next: JunctionTree) -> _ReverseProblem:
    return _ReverseProblem(t_next)


@lru_cache(maxsize=1 << 15)
def support_size(t_next: JunctionTree) -> int:
    """|R(t_next)|: number of source trees with positive forward density."""
    return _reverse_problem(t_next).size()


def backward_density(t_next: JunctionTree, t: JunctionTree, cfg: ExpanderConfig) -> float:
    size = support_size(t_next)
    if size == 0:
        raise EmptySupport("reverse kernel support is empty")
    if expand_density(t, t_next, cfg) > 0.0:
        return 1.0 / size
    return 0.0


def backward_sample(t_next: JunctionTree, rng) -> JunctionTree:
    """Uniform draw from the collapse support of t_next."""
    problem = _reverse_problem(t_next)
    if problem.events is not None and not problem.events:
        raise EmptySupport("reverse kernel support is empty")
    return problem.sample(rng)


def collapse_support(t_next: JunctionTree, cfg: ExpanderConfig | None = None):
    """Explicit collapse support (exhaustive; intended for small instances)."""
    problem = _ReverseProblem(t_next)
    check = cfg or ExpanderConfig(alpha=0.5, beta=0.5)
    out = []
    linking_options = []
    for v in problem.aff_g:
        linking_options.append(
            [
                [_norm_edge(u, w) for u, w in link]
                for link in enumerate_linkings(problem.blocks[v])
            ]
        )
    for combo in product(*linking_options):
        linkings = dict(zip(problem.aff_g, combo))
        candidate = problem.materialize(linkings)
        if expand_density(candidate, t_next, check) > 0.0:
            out.append(candidate)
    return out
