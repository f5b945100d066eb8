"""Artifact writers: delimited outputs plus rendered figures.

Every summary lands twice: as a CSV/JSON file (the machine-readable record)
and, for the report-style outputs, as a matplotlib figure saved next to it.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import ParseError
from .pgibbs import ChainRecord


def write_trajectory(path, records) -> None:
    with open(path, "a") as fh:
        for rec in records:
            fh.write(
                json.dumps(
                    {
                        "sweep": rec.sweep,
                        "edges": [list(e) for e in sorted(rec.edges)],
                        "size": rec.size,
                        "log_gamma": rec.log_gamma,
                    }
                )
                + "\n"
            )


def read_trajectory(path) -> list[ChainRecord]:
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                edges = frozenset(tuple(sorted(e)) for e in obj["edges"])
                records.append(
                    ChainRecord(
                        sweep=int(obj["sweep"]),
                        edges=edges,
                        size=int(obj["size"]),
                        log_gamma=float(obj["log_gamma"]),
                        seconds=float(obj.get("seconds", 0.0)),
                    )
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ParseError(lineno, str(exc))
    return records


def write_edge_marginals(path, marginals, names) -> None:
    p = len(names)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["var_a", "var_b", "probability"])
        for a in range(p):
            for b in range(a + 1, p):
                writer.writerow([names[a], names[b], f"{marginals[a, b]:.6f}"])


def read_edge_marginals(path, names) -> np.ndarray:
    p = len(names)
    idx = {n: i for i, n in enumerate(names)}
    mat = np.zeros((p, p))
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            a, b = idx[row["var_a"]], idx[row["var_b"]]
            mat[a, b] = mat[b, a] = float(row["probability"])
    return mat


def write_top_graphs(path, ranked) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "edges", "frequency"])
        for rank, (edges, freq) in enumerate(ranked, start=1):
            text = ";".join(f"{a}-{b}" for a, b in sorted(edges))
            writer.writerow([rank, text, f"{freq:.6f}"])


def write_map_graph(path, edges, frequency) -> None:
    with open(path, "w") as fh:
        json.dump(
            {"edges": [list(e) for e in sorted(edges)], "frequency": frequency},
            fh,
            indent=2,
        )


def write_autocorr(path, autocorr) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lag", "autocorrelation"])
        for lag, value in enumerate(autocorr):
            writer.writerow([lag, f"{value:.6f}"])


def write_run_meta(path, meta) -> None:
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


def write_exact_posterior(path, posterior) -> None:
    probs = posterior.probabilities
    order = np.argsort(-probs)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["edges", "probability"])
        for i in order:
            text = ";".join(f"{a}-{b}" for a, b in sorted(posterior.graphs[i].edges))
            writer.writerow([text, f"{probs[i]:.10g}"])


def write_logz_samples(path, samples) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "log_normalising_constant"])
        for i, value in enumerate(samples):
            writer.writerow([i, f"{value:.10g}"])


# --- figures -------------------------------------------------------------------


def plot_edge_marginals(path, marginals, names) -> None:
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    im = ax.imshow(marginals, vmin=0.0, vmax=1.0, cmap="viridis")
    ax.set_xticks(range(len(names)))
    ax.set_yticks(range(len(names)))
    ax.set_xticklabels(names, rotation=90, fontsize=7)
    ax.set_yticklabels(names, fontsize=7)
    ax.set_title("edge marginal probabilities")
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_autocorr(path, autocorr) -> None:
    fig, ax = plt.subplots(figsize=(5.4, 3.4))
    ax.plot(range(len(autocorr)), autocorr, lw=1.2)
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.set_xlabel("lag")
    ax.set_ylabel("autocorrelation of graph size")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_size_trace(path, sizes) -> None:
    fig, ax = plt.subplots(figsize=(5.4, 3.4))
    ax.plot(sizes, lw=0.7)
    ax.set_xlabel("sweep")
    ax.set_ylabel("number of edges")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def summary_bundle(out_dir, records, names, burn_in_used, max_lag=200) -> dict:
    """Write the full summary set from chain records; returns file map."""
    from . import summaries

    p = len(names)
    marginals = summaries.edge_marginals(records, p)
    map_edges, map_freq = summaries.map_graph(records)
    ranked = summaries.top_k(records, 10)
    sizes = [rec.size for rec in records]
    lag = min(max_lag, max(1, len(sizes) - 1))
    autocorr = summaries.autocorrelation(sizes, lag)

    files = {}
    files["edge_marginals"] = os.path.join(out_dir, "edge_marginals.csv")
    write_edge_marginals(files["edge_marginals"], marginals, names)
    files["map_graph"] = os.path.join(out_dir, "map_graph.json")
    write_map_graph(files["map_graph"], map_edges, map_freq)
    files["top_graphs"] = os.path.join(out_dir, "top_graphs.csv")
    write_top_graphs(files["top_graphs"], ranked)
    files["size_autocorr"] = os.path.join(out_dir, "size_autocorr.csv")
    write_autocorr(files["size_autocorr"], autocorr)
    files["edge_marginals_png"] = os.path.join(out_dir, "edge_marginals.png")
    plot_edge_marginals(files["edge_marginals_png"], marginals, names)
    files["size_autocorr_png"] = os.path.join(out_dir, "size_autocorr.png")
    plot_autocorr(files["size_autocorr_png"], autocorr)
    files["size_trace_png"] = os.path.join(out_dir, "size_trace.png")
    plot_size_trace(files["size_trace_png"], sizes)
    files["iact"] = float(summaries.iact(sizes))
    files["burn_in_used"] = burn_in_used
    return files
