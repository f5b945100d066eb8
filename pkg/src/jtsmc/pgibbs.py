"""Particle Gibbs with optional systematic refreshment.

One sweep runs a conditional SMC pass pinned to the reference trajectory,
draws a final particle from the last weights, and walks its genealogy back;
with refreshment enabled the final state is kept and the trajectory prefix
is redrawn through the backward (collapse) kernels, which provably improves
mixing in asymptotic variance.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .errors import AllWeightsZero
from .expander import backward_sample
from .graphs import graph_of, is_decomposable
from .scoring import log_gamma_graph, NEG_INF
from .smc import (
    ExtendedState,
    TemporalModel,
    log_normalising_constant,
    run_smc,
    trace_trajectory,
)

Trajectory = list  # list[ExtendedState], one per step 1..p


def check_trajectory(traj: Trajectory) -> None:
    """Consecutive consistency: orders extend, graphs restrict."""
    for m in range(1, len(traj)):
        prev, cur = traj[m - 1], traj[m]
        if cur.order[: len(prev.order)] != prev.order:
            raise ValueError("trajectory orders are not nested")
        if graph_of(cur.tree).restrict(m) != graph_of(prev.tree):
            raise ValueError("trajectory graphs do not restrict")


@dataclass
class ChainRecord:
    sweep: int
    edges: frozenset  # external 1-based pairs (a, b), a < b
    size: int
    log_gamma: float
    seconds: float


def external_edges(x: ExtendedState) -> frozenset:
    order = x.order
    out = set()
    for a, b in graph_of(x.tree).edges:
        u, v = order[a - 1], order[b - 1]
        out.add((u, v) if u < v else (v, u))
    return frozenset(out)


def csmc_transition(model: TemporalModel, reference: Trajectory, n: int, rng) -> Trajectory:
    """One particle Gibbs transition: conditional SMC plus genealogy trace."""
    if len(reference) != model.p:
        raise ValueError("reference trajectory must have length p")
    final = reference[-1]
    if log_gamma_graph(model.score, final.tree, final.order) == NEG_INF:
        raise AllWeightsZero("reference trajectory has a structural-zero score")
    system = run_smc(model, n, rng, reference=reference)
    return trace_trajectory(system, rng)


def external_tree(x: ExtendedState):
    """The final state's junction tree on external variable labels."""
    from jtsmc.graphs import JunctionTree

    return JunctionTree(
        tuple(frozenset(x.order[i - 1] for i in c) for c in x.tree.cliques),
        x.tree.edges,
    )


def _internalize(tree, order):
    from jtsmc.graphs import JunctionTree

    position = {label: i + 1 for i, label in enumerate(order)}
    return JunctionTree(
        tuple(frozenset(position[v] for v in c) for c in tree.cliques), tree.edges
    )


def _sample_order(model: TemporalModel, rng):
    from jtsmc.orders import sample_order_step

    order = (int(rng.integers(model.p)) + 1,)
    while len(order) < model.p:
        order = order + (sample_order_step(order, model.order_cfg, rng),)
    return order


def refresh(model: TemporalModel, traj: Trajectory, rng) -> Trajectory:
    """Keep the final tree, redraw its representation and the prefix.

    Two Gibbs substeps on the trajectory law: first the processing order is
    resampled from its exact conditional given the final external tree (the
    order path law, which the final target carries as an independent factor),
    then x_{p-1}..x_1 are redrawn through the backward collapse kernels.
    Without the representation move the variable order would never change
    across sweeps and edges between early-processed variables would freeze.
    """
    final = traj[-1]
    ext = external_tree(final)
    order = _sample_order(model, rng)
    out = [ExtendedState(order, _internalize(ext, order))]
    for m in range(len(traj) - 1, 0, -1):
        nxt = out[-1]
        tree = backward_sample(nxt.tree, rng)
        out.append(ExtendedState(nxt.order[: m], tree))
    out.reverse()
    return out


def initial_trajectory(model: TemporalModel, n: int, rng) -> Trajectory:
    """Unconditional SMC pass followed by a final-index genealogy trace."""
    system = run_smc(model, n, rng)
    return trace_trajectory(system, rng)


def run_chain(
    model: TemporalModel,
    n_particles: int,
    n_sweeps: int,
    burn_in: int,
    rng,
    refresh_enabled: bool = True,
    reference: Trajectory | None = None,
    record_trajectory=None,
) -> list[ChainRecord]:
    """PG chain; returns one record per kept sweep (after burn-in)."""
    if not 0 <= burn_in < n_sweeps:
        raise ValueError("need n_sweeps > burn_in >= 0")
    traj = reference if reference is not None else initial_trajectory(model, n_particles, rng)
    records = []
    for sweep in range(n_sweeps):
        t0 = time.perf_counter()
        traj = csmc_transition(model, traj, n_particles, rng)
        if refresh_enabled:
            traj = refresh(model, traj, rng)
        elapsed = time.perf_counter() - t0
        final = traj[-1]
        if sweep >= burn_in:
            edges = external_edges(final)
            assert is_decomposable(graph_of(final.tree))
            rec = ChainRecord(
                sweep=sweep,
                edges=edges,
                size=len(edges),
                log_gamma=log_gamma_graph(model.score, final.tree, final.order),
                seconds=elapsed,
            )
            records.append(rec)
            if record_trajectory is not None:
                record_trajectory(rec)
    return records


def smc_normalising_samples(model: TemporalModel, n: int, repeats: int, rng):
    """Independent SMC estimates of the log normalising constant."""
    return [log_normalising_constant(run_smc(model, n, rng)) for _ in range(repeats)]
