"""Command line interface.

Subcommands: sample | exact | smc | gen-gaussian | gen-discrete | analyze.
Options may also be supplied through a JSON config file (--config); explicit
flags win over config values.  Exit codes: 0 success, 2 validation error,
3 runtime failure.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import __version__, report
from .data import (
    Dataset,
    czech_autoworkers,
    gen_discrete,
    gen_gaussian,
    load_csv,
    save_csv,
)
from .errors import JtsmcError
from .expander import ExpanderConfig
from .graphs import LabeledGraph
from .orders import OrderKernelConfig
from .pgibbs import run_chain, smc_normalising_samples
from .scoring import (
    DirichletMultinomialScore,
    GaussWishartScore,
    UniformScore,
)
from .smc import TemporalModel


def _merge_config(ctx_params, config_path):
    if not config_path:
        return ctx_params
    with open(config_path) as fh:
        config = json.load(fh)
    merged = dict(ctx_params)
    for key, value in config.items():
        key = key.replace("-", "_")
        if merged.get(key) is None:
            merged[key] = value
    return merged


def _build_score(dataset: Dataset | None, params):
    model_name = params.get("model") or "uniform"
    max_clique = params.get("max_clique")
    if model_name == "uniform":
        p = dataset.p if dataset else params.get("p")
        if p is None:
            raise click.UsageError("uniform model without data requires p")
        return UniformScore(int(p), max_clique=max_clique)
    if dataset is None:
        raise click.UsageError(f"model {model_name} requires --data")
    if model_name == "dirichlet":
        return DirichletMultinomialScore(
            dataset.values,
            dataset.cardinalities(),
            pseudo_count_total=params.get("pseudo_count_total") or 1.0,
            max_clique=max_clique,
        )
    if model_name == "wishart":
        scale_spec = params.get("scale") or "identity"
        scale = None
        if scale_spec != "identity":
            scale = np.loadtxt(scale_spec, delimiter=",")
        dof = params.get("dof")
        return GaussWishartScore(
            dataset.values,
            dof=float(dof) if dof is not None else float(dataset.p),
            scale=scale,
            max_clique=max_clique,
        )
    raise click.UsageError(f"unknown model {model_name!r}")


def _temporal_model(dataset, params) -> TemporalModel:
    score = _build_score(dataset, params)
    p = score.p
    delta = params.get("delta") or p
    if not 1 <= int(delta):
        raise click.UsageError("delta must be >= 1")
    alpha = params.get("alpha") if params.get("alpha") is not None else 0.5
    beta = params.get("beta") if params.get("beta") is not None else 0.5
    return TemporalModel(
        score,
        OrderKernelConfig(p, int(delta)),
        ExpanderConfig(float(alpha), float(beta)),
    )


def _load_dataset(path) -> Dataset:
    if path == "czech":
        values, names = czech_autoworkers()
        return Dataset(names, values, True)
    return load_csv(path)


@click.group()
@click.version_option(__version__)
def main():
    """Bayesian structure learning over decomposable graphical models."""


common_opts = [
    click.option("--data", "data_path", default=None, help="CSV path, or 'czech' for the bundled fixture"),
    click.option("--model", type=click.Choice(["uniform", "dirichlet", "wishart"]), default=None),
    click.option("--pseudo-count-total", type=float, default=None),
    click.option("--dof", type=float, default=None),
    click.option("--scale", default=None, help="'identity' or a CSV matrix path"),
    click.option("--max-clique", type=int, default=None, help="clique-size cap prior"),
    click.option("--alpha", type=float, default=None),
    click.option("--beta", type=float, default=None),
    click.option("--delta", type=int, default=None),
    click.option("--order-initial", type=click.Choice(["uniform"]), default=None,
                 help="initial law for the node order"),
    click.option("--seed", type=int, default=None),
    click.option("--config", "config_path", default=None, help="JSON config merged under flags"),
    click.option("--out", "out_dir", default="out"),
]


def add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn

    return wrap


@main.command()
@add_options(common_opts)
@click.option("--N", "n_particles", type=int, default=None)
@click.option("--M", "n_sweeps", type=int, default=None)
@click.option("--burnin", type=int, default=None)
@click.option("--no-refresh", is_flag=True, default=False)
def sample(data_path, config_path, out_dir, no_refresh, **flags):
    """Run the particle Gibbs sampler and write summaries + figures."""
    params = _merge_config({**flags, "data": data_path}, config_path)
    try:
        dataset = _load_dataset(params["data"]) if params.get("data") else None
        model = _temporal_model(dataset, params)
        n_particles = int(params.get("n_particles") or 100)
        n_sweeps = int(params.get("n_sweeps") or 10000)
        burn_in = params.get("burnin")
        burn_in = int(burn_in) if burn_in is not None else int(0.3 * n_sweeps)
        if n_particles < 2 or not 0 <= burn_in < n_sweeps:
            raise click.UsageError("need N >= 2 and M > burnin >= 0")
        seed = int(params.get("seed") or 0)
        rng = np.random.default_rng(seed)
    except JtsmcError as exc:
        raise click.UsageError(str(exc))

    os.makedirs(out_dir, exist_ok=True)
    names = dataset.names if dataset else [f"x{i}" for i in range(1, model.p + 1)]
    trajectory_path = os.path.join(out_dir, "trajectory.jsonl")
    if os.path.exists(trajectory_path):
        os.remove(trajectory_path)
    try:
        records = run_chain(
            model,
            n_particles=n_particles,
            n_sweeps=n_sweeps,
            burn_in=burn_in,
            rng=rng,
            refresh_enabled=not no_refresh,
            record_trajectory=lambda rec: report.write_trajectory(trajectory_path, [rec]),
        )
        files = report.summary_bundle(out_dir, records, names, burn_in)
        meta = {
            "version": __version__,
            "numpy": np.__version__,
            "command": "sample",
            "data": params.get("data"),
            "model": params.get("model") or "uniform",
            "pseudo_count_total": params.get("pseudo_count_total"),
            "dof": params.get("dof"),
            "scale": params.get("scale"),
            "N": n_particles,
            "M": n_sweeps,
            "burnin": burn_in,
            "alpha": model.expander_cfg.alpha,
            "beta": model.expander_cfg.beta,
            "delta": model.order_cfg.bandwidth,
            "seed": seed,
            "refresh": not no_refresh,
            "iact_size": files["iact"],
        }
        report.write_run_meta(os.path.join(out_dir, "run_meta.json"), meta)
    except JtsmcError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    click.echo(f"wrote {out_dir}/trajectory.jsonl and summaries ({len(records)} records)")


@main.command()
@add_options(common_opts)
def exact(data_path, config_path, out_dir, **flags):
    """Exact posterior by full enumeration (p <= 6)."""
    from .exact import exact_posterior

    params = _merge_config({**flags, "data": data_path}, config_path)
    try:
        dataset = _load_dataset(params["data"]) if params.get("data") else None
        score = _build_score(dataset, params)
        posterior = exact_posterior(score, score.p)
    except JtsmcError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    os.makedirs(out_dir, exist_ok=True)
    names = dataset.names if dataset else [f"x{i}" for i in range(1, score.p + 1)]
    report.write_exact_posterior(os.path.join(out_dir, "exact_posterior.csv"), posterior)
    report.write_edge_marginals(
        os.path.join(out_dir, "exact_edge_marginals.csv"),
        posterior.edge_marginals(),
        names,
    )
    click.echo(f"wrote exact posterior over {len(posterior.graphs)} graphs to {out_dir}")


@main.command()
@add_options(common_opts)
@click.option("--N", "n_particles", type=int, default=None)
@click.option("--repeats", type=int, default=10, help="independent SMC passes")
def smc(data_path, config_path, out_dir, repeats, **flags):
    """Independent SMC passes emitting normalising-constant samples."""
    params = _merge_config({**flags, "data": data_path}, config_path)
    try:
        dataset = _load_dataset(params["data"]) if params.get("data") else None
        model = _temporal_model(dataset, params)
        n_particles = int(params.get("n_particles") or 100)
        rng = np.random.default_rng(int(params.get("seed") or 0))
        samples = smc_normalising_samples(model, n_particles, repeats, rng)
    except JtsmcError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    os.makedirs(out_dir, exist_ok=True)
    report.write_logz_samples(os.path.join(out_dir, "logz.csv"), samples)
    click.echo(f"wrote {repeats} log-normalising-constant samples to {out_dir}/logz.csv")


@main.command("gen-gaussian")
@click.option("--p", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--rho", type=float, default=0.9)
@click.option("--sigma2", type=float, default=1.0)
@click.option("--lags", default="1,2,3,4,5", help="comma separated lag choices")
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_dir", default="out")
def gen_gaussian_cmd(p, n, rho, sigma2, lags, seed, out_dir):
    """Zero-mean Gaussian data from a banded variable-lag dependence graph."""
    try:
        lag_list = [int(x) for x in lags.split(",") if x]
        data, graph, meta = gen_gaussian(p, n, rho, sigma2, lag_list, seed)
    except JtsmcError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    os.makedirs(out_dir, exist_ok=True)
    save_csv(os.path.join(out_dir, "data.csv"), [f"x{i}" for i in range(1, p + 1)], data)
    with open(os.path.join(out_dir, "true_graph.json"), "w") as fh:
        fh.write(graph.to_json())
    report.write_run_meta(
        os.path.join(out_dir, "gen_meta.json"),
        {"command": "gen-gaussian", "p": p, "n": n, "rho": rho, "sigma2": sigma2,
         "lags": lag_list, "seed": seed, **meta},
    )
    click.echo(f"wrote data.csv ({n}x{p}) and true_graph.json to {out_dir}")


@main.command("gen-discrete")
@click.option("--graph", "graph_path", required=True, help="graph JSON path")
@click.option("--cardinality", "cardinality_spec", default="2",
              help="levels per variable: one integer or a comma list")
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_dir", default="out")
def gen_discrete_cmd(graph_path, cardinality_spec, n, seed, out_dir):
    """Discrete data from a graph-Markov model built along a junction tree."""
    try:
        with open(graph_path) as fh:
            graph = LabeledGraph.from_json(fh.read())
        cards = [int(c) for c in cardinality_spec.split(",")]
        if len(cards) == 1:
            cards = cards * graph.node_count
        data = gen_discrete(graph, cards, n, seed)
    except JtsmcError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    os.makedirs(out_dir, exist_ok=True)
    names = [f"x{i}" for i in range(1, graph.node_count + 1)]
    save_csv(os.path.join(out_dir, "data.csv"), names, data)
    click.echo(f"wrote data.csv ({n}x{graph.node_count}) to {out_dir}")


@main.command()
@click.option("--trajectory", "trajectory_path", required=True)
@click.option("--burnin", type=int, default=0)
@click.option("--names", default=None, help="comma separated variable names")
@click.option("--out", "out_dir", default="out")
def analyze(trajectory_path, burnin, names, out_dir):
    """Recompute summaries (and figures) from a stored trajectory."""
    try:
        records = report.read_trajectory(trajectory_path)
        if burnin >= len(records):
            raise click.UsageError("burnin >= number of stored records")
        records = [rec for rec in records if rec.sweep >= burnin]
        p = max((max(max(e) for e in rec.edges) for rec in records if rec.edges), default=1)
        name_list = names.split(",") if names else []
        p = max(p, len(name_list))
        name_list += [f"x{i}" for i in range(len(name_list) + 1, p + 1)]
        os.makedirs(out_dir, exist_ok=True)
        report.summary_bundle(out_dir, records, name_list, burnin)
    except JtsmcError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    click.echo(f"analyzed {len(records)} records into {out_dir}")


if __name__ == "__main__":
    main()
