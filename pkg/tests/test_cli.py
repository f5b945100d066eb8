"""CLI surface: artifacts, round trips, reproducibility, exit codes."""

import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from jtsmc.cli import main
from jtsmc.report import read_edge_marginals, read_trajectory


@pytest.fixture
def runner():
    return CliRunner()


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def test_sample_writes_all_artifacts(runner, tmp_path):
    out = tmp_path / "run"
    run_ok(
        runner,
        [
            "sample", "--data", "czech", "--model", "dirichlet",
            "--pseudo-count-total", "1.0", "--N", "10", "--M", "30",
            "--burnin", "5", "--seed", "4", "--out", str(out),
        ],
    )
    for name in [
        "trajectory.jsonl", "edge_marginals.csv", "map_graph.json",
        "top_graphs.csv", "size_autocorr.csv", "run_meta.json",
        "edge_marginals.png", "size_autocorr.png", "size_trace.png",
    ]:
        assert (out / name).exists(), name
    records = read_trajectory(out / "trajectory.jsonl")
    assert len(records) == 25
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["N"] == 10 and meta["M"] == 30 and meta["seed"] == 4


def test_sample_single_sweep_is_well_formed(runner, tmp_path):
    out = tmp_path / "tiny"
    run_ok(
        runner,
        ["sample", "--data", "czech", "--model", "dirichlet", "--N", "5",
         "--M", "1", "--burnin", "0", "--seed", "0", "--out", str(out)],
    )
    assert len(read_trajectory(out / "trajectory.jsonl")) == 1


def test_sample_reproducible_for_fixed_seed(runner, tmp_path):
    args = ["sample", "--data", "czech", "--model", "dirichlet", "--N", "8",
            "--M", "20", "--burnin", "0", "--seed", "123"]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run_ok(runner, args + ["--out", str(out_a)])
    run_ok(runner, args + ["--out", str(out_b)])
    assert (out_a / "trajectory.jsonl").read_text() == (out_b / "trajectory.jsonl").read_text()


def test_exact_artifacts_and_row_sums(runner, tmp_path):
    out = tmp_path / "exact"
    run_ok(
        runner,
        ["exact", "--data", "czech", "--model", "dirichlet",
         "--pseudo-count-total", "1.0", "--out", str(out)],
    )
    rows = (out / "exact_posterior.csv").read_text().strip().splitlines()[1:]
    assert len(rows) == 18154
    total = sum(float(r.rsplit(",", 1)[1]) for r in rows)
    assert abs(total - 1.0) < 1e-9
    top_edges = rows[0].split(",")[0]
    assert top_edges == "1-3;1-5;2-3;3-5;4-5"


def test_exact_uniform_p3(runner, tmp_path, monkeypatch):
    # uniform model without data: pass p through a config file
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p": 3}))
    out = tmp_path / "exact3"
    run_ok(runner, ["exact", "--model", "uniform", "--config", str(cfg), "--out", str(out)])
    rows = (out / "exact_posterior.csv").read_text().strip().splitlines()[1:]
    assert len(rows) == 8
    assert all(abs(float(r.rsplit(",", 1)[1]) - 0.125) < 1e-12 for r in rows)


def test_analyze_reproduces_sample_summaries(runner, tmp_path):
    out = tmp_path / "run"
    run_ok(
        runner,
        ["sample", "--data", "czech", "--model", "dirichlet", "--N", "8",
         "--M", "25", "--burnin", "0", "--seed", "9", "--out", str(out)],
    )
    re_out = tmp_path / "re"
    run_ok(
        runner,
        ["analyze", "--trajectory", str(out / "trajectory.jsonl"),
         "--names", "smoke,mental,physical,systolic,protein,family",
         "--out", str(re_out)],
    )
    assert (out / "edge_marginals.csv").read_text() == (re_out / "edge_marginals.csv").read_text()
    assert (out / "top_graphs.csv").read_text() == (re_out / "top_graphs.csv").read_text()
    assert (out / "size_autocorr.csv").read_text() == (re_out / "size_autocorr.csv").read_text()


def test_analyze_burnin_too_large_fails(runner, tmp_path):
    out = tmp_path / "run"
    run_ok(
        runner,
        ["sample", "--data", "czech", "--model", "dirichlet", "--N", "5",
         "--M", "5", "--burnin", "0", "--seed", "1", "--out", str(out)],
    )
    result = runner.invoke(
        main,
        ["analyze", "--trajectory", str(out / "trajectory.jsonl"), "--burnin", "99",
         "--out", str(tmp_path / "x")],
    )
    assert result.exit_code == 2


def test_gen_gaussian_and_sample_roundtrip(runner, tmp_path):
    gen_out = tmp_path / "gen"
    run_ok(
        runner,
        ["gen-gaussian", "--p", "6", "--n", "60", "--rho", "0.9",
         "--seed", "2", "--out", str(gen_out)],
    )
    assert (gen_out / "data.csv").exists()
    assert (gen_out / "true_graph.json").exists()
    meta = json.loads((gen_out / "gen_meta.json").read_text())
    assert meta["precision_zero_fraction"] == 1.0
    out = tmp_path / "wish"
    run_ok(
        runner,
        ["sample", "--data", str(gen_out / "data.csv"), "--model", "wishart",
         "--dof", "6", "--N", "8", "--M", "15", "--burnin", "0",
         "--seed", "0", "--out", str(out)],
    )
    assert (out / "edge_marginals.csv").exists()


def test_gen_discrete_roundtrip(runner, tmp_path):
    from jtsmc.data import random_decomposable_graph

    graph_path = tmp_path / "g.json"
    graph_path.write_text(random_decomposable_graph(5, 0.5, 0.5, 3).to_json())
    gen_out = tmp_path / "gend"
    run_ok(
        runner,
        ["gen-discrete", "--graph", str(graph_path), "--n", "100",
         "--seed", "1", "--out", str(gen_out)],
    )
    data = (gen_out / "data.csv").read_text().strip().splitlines()
    assert len(data) == 101


def test_smc_subcommand_emits_logz(runner, tmp_path):
    out = tmp_path / "smc"
    run_ok(
        runner,
        ["smc", "--data", "czech", "--model", "dirichlet", "--N", "20",
         "--repeats", "4", "--seed", "5", "--out", str(out)],
    )
    rows = (out / "logz.csv").read_text().strip().splitlines()
    assert len(rows) == 5


def test_config_file_merges_under_flags(runner, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_particles": 6, "n_sweeps": 12, "burnin": 2, "seed": 77}))
    out = tmp_path / "run"
    run_ok(
        runner,
        ["sample", "--data", "czech", "--model", "dirichlet",
         "--config", str(cfg), "--out", str(out)],
    )
    meta = json.loads((out / "run_meta.json").read_text())
    assert meta["N"] == 6 and meta["M"] == 12 and meta["seed"] == 77


def test_edge_marginals_csv_roundtrip(runner, tmp_path):
    out = tmp_path / "run"
    run_ok(
        runner,
        ["sample", "--data", "czech", "--model", "dirichlet", "--N", "6",
         "--M", "12", "--burnin", "0", "--seed", "3", "--out", str(out)],
    )
    names = ["smoke", "mental", "physical", "systolic", "protein", "family"]
    mat = read_edge_marginals(out / "edge_marginals.csv", names)
    assert mat.shape == (6, 6)
    assert np.allclose(mat, mat.T)
    assert mat.min() >= 0.0 and mat.max() <= 1.0


def test_validation_error_exit_code(runner, tmp_path):
    result = runner.invoke(
        main,
        ["sample", "--data", "czech", "--model", "dirichlet", "--N", "1",
         "--M", "5", "--out", str(tmp_path / "x")],
    )
    assert result.exit_code == 2
