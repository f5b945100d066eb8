"""Particle Gibbs transitions, refreshment, chains, diagnostics."""

import math
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from jtsmc.errors import AllWeightsZero
from jtsmc.exact import exact_posterior
from jtsmc.expander import ExpanderConfig, collapse_support
from jtsmc.graphs import graph_of, is_decomposable
from jtsmc.orders import OrderKernelConfig
from jtsmc.pgibbs import (
    ChainRecord,
    check_trajectory,
    csmc_transition,
    external_edges,
    initial_trajectory,
    refresh,
    run_chain,
)
from jtsmc.scoring import SizeCapScore, UniformScore
from jtsmc.smc import ExtendedState, TemporalModel
from jtsmc.summaries import (
    autocorrelation,
    edge_marginals,
    iact,
    map_graph,
    ranking_auc,
    top_k,
)


def uniform_model(p, alpha=0.5, beta=0.5):
    return TemporalModel(
        UniformScore(p), OrderKernelConfig(p, p), ExpanderConfig(alpha, beta)
    )


def tv_distance(records, posterior):
    freq = Counter(rec.edges for rec in records)
    n = len(records)
    return 0.5 * sum(
        abs(freq.get(frozenset(g.edges), 0) / n - prob)
        for g, prob in zip(posterior.graphs, posterior.probabilities)
    )


def test_csmc_returns_consistent_trajectory(rng):
    model = uniform_model(4)
    traj = initial_trajectory(model, 10, rng)
    check_trajectory(traj)
    for _ in range(20):
        traj = csmc_transition(model, traj, 5, rng)
        check_trajectory(traj)


def test_csmc_rejects_structural_zero_reference(rng):
    from jtsmc.graphs import JunctionTree
    from jtsmc.smc import SINGLE_NODE_TREE

    model = TemporalModel(
        SizeCapScore(3, max_clique=1),
        OrderKernelConfig(3, 3),
        ExpanderConfig(0.5, 0.5),
    )
    pair = JunctionTree((frozenset({1, 2}),), frozenset())
    final = JunctionTree((frozenset({1, 2}), frozenset({3})), frozenset({(0, 1)}))
    reference = [
        ExtendedState((1,), SINGLE_NODE_TREE),
        ExtendedState((1, 2), pair),
        ExtendedState((1, 2, 3), final),
    ]
    with pytest.raises(AllWeightsZero):
        csmc_transition(model, reference, 5, rng)


def test_pg_chain_invariance_small(rng):
    model = uniform_model(3)
    posterior = exact_posterior(UniformScore(3), 3)
    records = run_chain(model, n_particles=2, n_sweeps=12000, burn_in=0, rng=rng)
    assert tv_distance(records, posterior) < 0.03


def test_pg_chain_invariance_without_refresh(rng):
    model = uniform_model(3)
    posterior = exact_posterior(UniformScore(3), 3)
    records = run_chain(
        model, n_particles=2, n_sweeps=12000, burn_in=0, rng=rng, refresh_enabled=False
    )
    assert tv_distance(records, posterior) < 0.03


def test_refresh_keeps_final_external_tree(rng):
    from jtsmc.pgibbs import external_tree

    model = uniform_model(4)
    traj = initial_trajectory(model, 10, rng)
    for _ in range(50):
        refreshed = refresh(model, traj, rng)
        assert external_tree(refreshed[-1]) == external_tree(traj[-1])
        assert external_edges(refreshed[-1]) == external_edges(traj[-1])
        check_trajectory(refreshed)


def test_refresh_single_step_is_identity(rng):
    model = uniform_model(1)
    traj = initial_trajectory(model, 5, rng)
    assert refresh(model, traj, rng) == traj


def test_refresh_resamples_order_from_path_law(rng):
    from jtsmc.orders import order_log_prob
    import math

    model = uniform_model(3)
    traj = initial_trajectory(model, 10, rng)
    counts = Counter(refresh(model, traj, rng)[-1].order for _ in range(12000))
    expected = {
        order: math.exp(order_log_prob(order, model.order_cfg)) for order in counts
    }
    assert len(counts) == 6  # all 3! orderings appear under the wide bandwidth
    _, pval = chisquare(
        list(counts.values()), [12000 * expected[o] for o in counts]
    )
    assert pval > 0.01


def test_refresh_samples_uniformly_from_collapse(rng):
    from jtsmc.pgibbs import _internalize, external_tree

    model = uniform_model(3)
    cfg = model.expander_cfg
    traj = initial_trajectory(model, 10, rng)
    ext = external_tree(traj[-1])
    by_order = {}
    for _ in range(30000):
        out = refresh(model, traj, rng)
        by_order.setdefault(out[-1].order, Counter())[out[1].tree] += 1
    # conditional on the resampled representation, the middle state must be
    # uniform over the collapse support of the relabeled final tree
    order, counts = max(by_order.items(), key=lambda kv: sum(kv[1].values()))
    support = collapse_support(_internalize(ext, order), cfg)
    assert set(counts) <= set(support)
    if len(support) > 1:
        observed = [counts.get(t, 0) for t in support]
        _, pval = chisquare(observed)
        assert pval > 0.01


def test_run_chain_records_are_decomposable_and_sized(rng):
    model = uniform_model(4)
    records = run_chain(model, n_particles=5, n_sweeps=50, burn_in=10, rng=rng)
    assert len(records) == 40
    for rec in records:
        g_edges = rec.edges
        assert rec.size == len(g_edges)
        assert math.isfinite(rec.log_gamma)


def test_run_chain_deterministic_given_seed():
    model = uniform_model(3)
    r1 = run_chain(model, 4, 30, 0, np.random.default_rng(42))
    r2 = run_chain(model, 4, 30, 0, np.random.default_rng(42))
    assert [rec.edges for rec in r1] == [rec.edges for rec in r2]


def test_run_chain_validates_burn_in(rng):
    model = uniform_model(3)
    with pytest.raises(ValueError):
        run_chain(model, 4, 10, 10, rng)


# --- summaries ---------------------------------------------------------------------


def fake_records(edge_sets):
    return [
        ChainRecord(sweep=i, edges=frozenset(e), size=len(e), log_gamma=0.0, seconds=0.0)
        for i, e in enumerate(edge_sets)
    ]


def test_edge_marginals_empty_and_complete():
    p = 3
    empty = fake_records([set()])
    assert np.array_equal(edge_marginals(empty, p), np.zeros((p, p)))
    complete = fake_records([{(1, 2), (1, 3), (2, 3)}])
    mat = edge_marginals(complete, p)
    assert np.array_equal(mat, np.ones((p, p)) - np.eye(p))


def test_map_graph_tie_break_lexicographic():
    records = fake_records([{(1, 2)}, {(1, 3)}])
    edges, freq = map_graph(records)
    assert edges == frozenset({(1, 2)})
    assert freq == 0.5


def test_top_k_orders_by_frequency():
    records = fake_records([{(1, 2)}, {(1, 2)}, {(2, 3)}])
    ranked = top_k(records, 2)
    assert ranked[0][0] == frozenset({(1, 2)})
    assert ranked[0][1] == pytest.approx(2 / 3)


def test_autocorrelation_constant_series_guard():
    acf = autocorrelation([3, 3, 3, 3], max_lag=2)
    assert np.array_equal(acf, np.ones(3))


def test_iact_white_noise(rng):
    series = rng.normal(size=100000)
    assert 0.9 < iact(series) < 1.1


def test_ranking_auc_perfect_and_random():
    scores = np.array([0.9, 0.8, 0.2, 0.1])
    truth = np.array([True, True, False, False])
    assert ranking_auc(scores, truth) == 1.0
    assert ranking_auc(np.array([0.5, 0.5, 0.5, 0.5]), truth) == 0.5
