"""Posterior summaries and mixing diagnostics from chain records."""

from __future__ import annotations

from collections import Counter

import numpy as np


def edge_marginals(records, p: int) -> np.ndarray:
    """Symmetric p x p matrix of edge inclusion frequencies."""
    if not records:
        raise ValueError("no records")
    mat = np.zeros((p, p))
    for rec in records:
        for a, b in rec.edges:
            mat[a - 1, b - 1] += 1.0
            mat[b - 1, a - 1] += 1.0
    return mat / len(records)


def graph_frequencies(records) -> Counter:
    return Counter(rec.edges for rec in records)


def map_graph(records):
    """Most frequent graph; ties broken by lexicographic edge list."""
    freqs = graph_frequencies(records)
    best = min(freqs.items(), key=lambda kv: (-kv[1], sorted(kv[0])))
    return best[0], best[1] / len(records)


def top_k(records, k: int):
    freqs = graph_frequencies(records)
    ranked = sorted(freqs.items(), key=lambda kv: (-kv[1], sorted(kv[0])))
    return [(edges, count / len(records)) for edges, count in ranked[:k]]


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Standard biased autocorrelation estimator; constant series give 1."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    x = x - x.mean()
    denom = float(np.dot(x, x))
    out = np.ones(min(max_lag, n - 1) + 1)
    if denom == 0.0:
        return out
    for lag in range(1, len(out)):
        out[lag] = float(np.dot(x[:-lag], x[lag:])) / denom
    return out


def iact(series) -> float:
    """Integrated autocorrelation time, truncated at the first negative lag."""
    x = np.asarray(series, dtype=float)
    rho = autocorrelation(x, max_lag=len(x) - 1)
    total = 1.0
    for r in rho[1:]:
        if r < 0.0:
            break
        total += 2.0 * r
    return total


def ranking_auc(scores: np.ndarray, truth: np.ndarray) -> float:
    """Mann-Whitney AUC of score-ranked items against binary ground truth."""
    scores = np.asarray(scores, dtype=float).ravel()
    truth = np.asarray(truth).ravel().astype(bool)
    pos = scores[truth]
    neg = scores[~truth]
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("need both positive and negative items")
    wins = 0.0
    for s in pos:
        wins += np.sum(s > neg) + 0.5 * np.sum(s == neg)
    return float(wins / (len(pos) * len(neg)))
