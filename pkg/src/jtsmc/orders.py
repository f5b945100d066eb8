"""Node-order kernels: how the temporal process picks the next variable.

A state carries the ordered tuple of external labels already processed; the
next label is uniform over the unused labels within bandwidth ``delta`` of
the current set, falling back to all unused labels when that window is empty
(small bandwidths can otherwise strand the chain).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache


@dataclass(frozen=True)
class OrderKernelConfig:
    p: int
    bandwidth: int

    def __post_init__(self):
        if not 1 <= self.bandwidth:
            raise ValueError("bandwidth must be >= 1")
        if self.p < 1:
            raise ValueError("p must be >= 1")


@lru_cache(maxsize=1 << 17)
def _candidates_cached(order: tuple[int, ...], p: int, bandwidth: int) -> tuple[int, ...]:
    used = set(order)
    near = [
        s
        for s in range(1, p + 1)
        if s not in used and min(abs(s - v) for v in order) <= bandwidth
    ]
    if near:
        return tuple(near)
    return tuple(s for s in range(1, p + 1) if s not in used)


def order_candidates(order: tuple[int, ...], cfg: OrderKernelConfig) -> tuple[int, ...]:
    return _candidates_cached(tuple(order), cfg.p, cfg.bandwidth)


def order_step_density(order: tuple[int, ...], j: int, cfg: OrderKernelConfig) -> float:
    if j in order or not 1 <= j <= cfg.p:
        return 0.0
    cands = order_candidates(order, cfg)
    return 1.0 / len(cands) if j in cands else 0.0


def sample_order_step(order: tuple[int, ...], cfg: OrderKernelConfig, rng) -> int:
    cands = order_candidates(order, cfg)
    return cands[rng.integers(len(cands))]


@lru_cache(maxsize=100000)
def _order_log_prob_cached(order: tuple[int, ...], p: int, bandwidth: int) -> float:
    cfg = OrderKernelConfig(p, bandwidth)
    out = -math.log(p)
    for m in range(1, len(order)):
        q = order_step_density(order[:m], order[m], cfg)
        if q == 0.0:
            return float("-inf")
        out += math.log(q)
    return out


def order_log_prob(order: tuple[int, ...], cfg: OrderKernelConfig) -> float:
    """Log path probability of the ordered tuple: rho_1(v1) prod q-steps.

    Satisfies the recursion rho_{m+1}(v + (j,)) = rho_m(v) q_m(v, j) exactly;
    summed over all orderings of the full label set it equals 1.
    """
    return _order_log_prob_cached(tuple(order), cfg.p, cfg.bandwidth)
