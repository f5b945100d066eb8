"""Sequential Monte Carlo over the temporalised junction-tree flow.

States are pairs (node order, junction tree on internal labels 1..m); the
order tuple maps internal label i to the external variable order[i-1].  The
unnormalised target at step m is rho_m(order) * gamma(tree) / mu(g(tree)),
and one SMC step resamples ancestors, extends the order through the
bandwidth kernel, expands the tree through the expansion kernel, and weights
with the simplified incremental ratio

    gamma-delta * mu-ratio * backward-density / forward-density,

in which the order-kernel factors have cancelled exactly.  Weights live in
log space throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import AllWeightsZero
from .expander import ExpanderConfig, expand, support_size
from .graphs import JunctionTree
from .orders import OrderKernelConfig, order_log_prob, sample_order_step
from .scoring import NEG_INF, ScoreModel, log_gamma_delta, log_gamma_graph
from .treecount import clique_sep_symmetric_diff, log_mu_of_tree

SINGLE_NODE_TREE = JunctionTree((frozenset({1}),), frozenset())


class ExtendedState(NamedTuple):
    order: tuple[int, ...]
    tree: JunctionTree


@dataclass
class TemporalModel:
    score: ScoreModel
    order_cfg: OrderKernelConfig
    expander_cfg: ExpanderConfig

    @property
    def p(self) -> int:
        return self.order_cfg.p


def log_unnormalised_target(model: TemporalModel, x: ExtendedState) -> float:
    """log of rho_m(order) * gamma(g(tree) under order) / mu(g(tree))."""
    lg = log_gamma_graph(model.score, x.tree, x.order)
    if lg == NEG_INF:
        return NEG_INF
    return order_log_prob(x.order, model.order_cfg) + lg - log_mu_of_tree(x.tree)


@lru_cache(maxsize=1 << 15)
def _tree_weight_part(tree_m, tree_next, cfg) -> float:
    """Order-independent weight factors: mu ratio, reverse and forward density."""
    from .expander import _expand_density_cached

    lmu = log_mu_of_tree(tree_m) - log_mu_of_tree(tree_next)
    fwd = _expand_density_cached(tree_m, tree_next, cfg)
    if fwd <= 0.0:
        raise AllWeightsZero("proposed transition has zero forward density")
    return lmu - math.log(support_size(tree_next)) - math.log(fwd)


def transition_log_weight(
    model: TemporalModel, tree_m: JunctionTree, x_next: ExtendedState
) -> float:
    """Simplified incremental weight of the transition tree_m -> x_next."""
    delta = clique_sep_symmetric_diff(tree_m, x_next.tree)
    lg = log_gamma_delta(model.score, delta, x_next.order)
    if lg == NEG_INF:
        return NEG_INF
    return lg + _tree_weight_part(tree_m, x_next.tree, model.expander_cfg)


@dataclass
class ParticleSystem:
    """Complete history of one SMC pass."""

    states: list  # per generation, list of ExtendedState
    log_weights: list  # per generation, np.ndarray
    ancestors: list  # per generation >= 2, np.ndarray of parent indices
    log_mean_weights: list = field(default_factory=list)
    ess: list = field(default_factory=list)  # diagnostic only

    @property
    def n_particles(self) -> int:
        return len(self.states[0])

    @property
    def steps(self) -> int:
        return len(self.states)


def _normalised(log_w: np.ndarray) -> np.ndarray:
    finite = np.isfinite(log_w)
    if not finite.any():
        raise AllWeightsZero("all particle weights are zero; prior and data disagree")
    shifted = np.where(finite, log_w - log_w[finite].max(), -np.inf)
    w = np.exp(shifted)
    return w / w.sum()


def _log_mean(log_w: np.ndarray) -> float:
    finite = log_w[np.isfinite(log_w)]
    if finite.size == 0:
        raise AllWeightsZero("all particle weights are zero")
    shift = finite.max()
    return float(shift + math.log(np.exp(finite - shift).sum()) - math.log(len(log_w)))


def effective_sample_size(log_w: np.ndarray) -> float:
    w = _normalised(log_w)
    return float(1.0 / np.square(w).sum())


def initial_particles(model: TemporalModel, n: int, rng, reference=None):
    """Generation 1: order label uniform, the unique single-node tree."""
    states = []
    log_w = np.empty(n)
    for i in range(n):
        if reference is not None and i == n - 1:
            states.append(reference[0])
        else:
            label = int(rng.integers(model.p)) + 1
            states.append(ExtendedState((label,), SINGLE_NODE_TREE))
        log_w[i] = model.score.log_potential(frozenset({states[i].order[0]}))
    return states, log_w


def smc_step(model: TemporalModel, states, log_w, step_m, rng, reference=None):
    """One update: resample, extend order, expand tree, reweight.

    ``reference`` pins particle N to the reference trajectory (conditional
    SMC); its ancestor is the reference particle itself.
    """
    n = len(states)
    probs = _normalised(log_w)
    cumulative = np.cumsum(probs)
    cumulative[-1] = 1.0
    n_free = n - 1 if reference is not None else n
    ancestors = np.empty(n, dtype=np.int64)
    ancestors[:n_free] = np.searchsorted(cumulative, rng.random(n_free))
    new_states = []
    new_log_w = np.empty(n)
    for i in range(n):
        if reference is not None and i == n - 1:
            ancestors[i] = n - 1
            x_next = reference[step_m]
        else:
            parent = states[ancestors[i]]
            label = sample_order_step(parent.order, model.order_cfg, rng)
            tree_next, _ = expand(parent.tree, model.expander_cfg, rng)
            x_next = ExtendedState(parent.order + (label,), tree_next)
        new_states.append(x_next)
        new_log_w[i] = transition_log_weight(model, states[ancestors[i]].tree, x_next)
    return new_states, new_log_w, ancestors


def run_smc(model: TemporalModel, n: int, rng, reference=None) -> ParticleSystem:
    """Full pass m = 1..p; conditional when a reference trajectory is given."""
    states, log_w = initial_particles(model, n, rng, reference=reference)
    system = ParticleSystem(
        [states], [log_w], [], [_log_mean(log_w)], [effective_sample_size(log_w)]
    )
    for step_m in range(1, model.p):
        states, log_w, ancestors = smc_step(
            model, states, log_w, step_m, rng, reference=reference
        )
        system.states.append(states)
        system.log_weights.append(log_w)
        system.ancestors.append(ancestors)
        system.log_mean_weights.append(_log_mean(log_w))
        system.ess.append(effective_sample_size(log_w))
    return system


def log_normalising_constant(system: ParticleSystem) -> float:
    """Unbiased estimator: sum of per-step log mean weights."""
    return float(sum(system.log_mean_weights))


def trace_trajectory(system: ParticleSystem, rng) -> list[ExtendedState]:
    """Draw a final index from the last weights and walk the genealogy back."""
    probs = _normalised(system.log_weights[-1])
    b = int(rng.choice(system.n_particles, p=probs))
    path = [system.states[-1][b]]
    for m in range(system.steps - 2, -1, -1):
        b = int(system.ancestors[m][b])
        path.append(system.states[m][b])
    path.reverse()
    return path
