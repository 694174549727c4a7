import numpy as np
import pytest
from click.testing import CliRunner

from descent_mesh.cli import main as cli_main
from descent_mesh.experiments import (
    ExperimentConfig,
    dump_datasets,
    error_metric,
    generate_dataset,
    load_config,
    run_experiment,
    run_seed,
)
from descent_mesh.objectives import (
    QuadraticObjective,
    RidgeObjective,
    centralized_optimum,
    load_node_dataset,
)

GOSSIP_CFG = """
[topology]
kind = ring
n = 12

[algorithms]
run = esdacd, gossip, heavyball

[objective]
family = averaging

[policy]
mu = constant:0.70710678118654752
delays = constant:1.0

[run]
seeds = 0-3
iterations = 300
record_every = 50
"""

SSDA_CFG = """
[topology]
kind = grid2d
n = 16

[algorithms]
run = esdacd, ssda

[objective]
family = regression
dim = 4
samples = 10
reg = 1.0

[policy]
mu = ssda_matched
delays = constant:1.0

[run]
seeds = 0,1
ssda_iterations = 40
record_every = 40
"""


def write_cfg(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_config_parsing(tmp_path):
    cfg = load_config(write_cfg(tmp_path, GOSSIP_CFG))
    assert cfg.topology == "ring" and cfg.n == 12
    assert cfg.algorithms == ("esdacd", "gossip", "heavyball")
    assert cfg.mu_policy == "constant"
    assert cfg.mu_value == pytest.approx(np.sqrt(0.5))
    assert cfg.seeds == (0, 1, 2, 3)
    assert cfg.metric == "consensus"


def test_config_derives_edge_budget_from_ssda(tmp_path):
    cfg = load_config(write_cfg(tmp_path, SSDA_CFG))
    # n/4 times more edge iterations than ssda rounds
    assert cfg.iterations == (16 // 4) * 40


def test_config_rejects_budget_violating_protocol():
    with pytest.raises(ValueError):
        ExperimentConfig(
            topology="grid2d", n=16, algorithms=("esdacd", "ssda"),
            family="regression", ssda_iterations=10, iterations=100,
        )


def test_config_rejects_unknown_algorithm():
    with pytest.raises(ValueError):
        ExperimentConfig(algorithms=("esdacd", "sgd"), iterations=10)


def test_averaging_start_has_ten_percent_ones():
    cfg = ExperimentConfig(topology="ring", n=100, family="averaging", iterations=1)
    objs, values = generate_dataset(cfg, seed=0)
    assert values.shape == (100, 1)
    assert int(values.sum()) == 10
    assert all(isinstance(o, QuadraticObjective) for o in objs)


def test_regression_homogeneous_shapes():
    cfg = ExperimentConfig(
        topology="ring", n=6, family="regression", dim=50, n_samples=150, iterations=1
    )
    objs, _ = generate_dataset(cfg, seed=1)
    assert all(o.features.shape == (50, 150) for o in objs)


def test_heterogeneous_sample_counts_in_range():
    cfg = ExperimentConfig(
        topology="ring", n=30, family="regression", dim=50,
        n_samples_range=(50, 300), iterations=1,
    )
    objs, _ = generate_dataset(cfg, seed=2)
    counts = [o.features.shape[1] for o in objs]
    assert min(counts) >= 50 and max(counts) <= 300
    assert len(set(counts)) > 3


def test_regression_targets_follow_mean_plus_cosine():
    cfg = ExperimentConfig(
        topology="ring", n=10, family="regression", dim=5, n_samples=200,
        noise_var=0.25, iterations=1,
    )
    objs, _ = generate_dataset(cfg, seed=3)
    residuals = []
    for obj in objs:
        means = obj.features.mean(axis=0)
        residuals.append(obj.targets - means - np.cos(means))
    pooled = np.concatenate(residuals)
    assert abs(pooled.mean()) < 0.05
    assert abs(pooled.std() - 0.5) < 0.05


def test_classification_dataset_balanced_pm1():
    cfg = ExperimentConfig(
        topology="ring", n=5, family="classification", dim=4, n_samples=20, iterations=1
    )
    objs, _ = generate_dataset(cfg, seed=4)
    for obj in objs:
        assert set(np.unique(obj.labels)) == {-1.0, 1.0}
        assert int(np.sum(obj.labels == 1.0)) == 10


def test_datasets_deterministic_per_seed():
    cfg = ExperimentConfig(topology="ring", n=4, family="regression", dim=3,
                           n_samples=8, iterations=1)
    a, _ = generate_dataset(cfg, seed=9)
    b, _ = generate_dataset(cfg, seed=9)
    c, _ = generate_dataset(cfg, seed=10)
    assert np.array_equal(a[0].features, b[0].features)
    assert not np.array_equal(a[0].features, c[0].features)


def test_error_metric_zero_at_optimum():
    objs = [QuadraticObjective([1.0]), QuadraticObjective([3.0])]
    x_star, f_star = centralized_optimum(objs)
    estimates = np.tile(x_star, (2, 1))
    val = error_metric(estimates, objs, (x_star, f_star, None), "max_subopt")
    assert abs(val) <= 1e-12


def test_error_metric_initial_consensus():
    values = np.array([[1.0], [0.0], [0.0], [0.0]])
    objs = [QuadraticObjective(v) for v in values]
    val = error_metric(values, objs, (None, None, values.mean(axis=0)), "consensus")
    assert val == pytest.approx(0.75)


def test_error_metric_hand_built_regression():
    # f1 = theta^2/2, f2 = (theta-2)^2/2; F* = 1 at theta = 1.
    # F(0) = 2 and F(3) = 5, so the max suboptimality at (0, 3) is 4.
    a = RidgeObjective(np.array([[1.0]]), np.array([0.0]), reg=0.0)
    b = RidgeObjective(np.array([[1.0]]), np.array([2.0]), reg=0.0)
    x_star, f_star = centralized_optimum([a, b])
    val = error_metric(np.array([[0.0], [3.0]]), [a, b], (x_star, f_star, None), "max_subopt")
    assert val == pytest.approx(4.0)


def test_degenerate_zero_iterations_rows():
    cfg = ExperimentConfig(topology="ring", n=10, algorithms=("gossip",),
                           family="averaging", iterations=0, seeds=(0,))
    rows = run_experiment(cfg)
    assert len(rows) == 1
    assert rows[0].t == 0
    assert rows[0].error == pytest.approx(0.9)  # 1 one among 10 nodes


def test_run_seed_produces_paired_traces(tmp_path):
    cfg = load_config(write_cfg(tmp_path, GOSSIP_CFG))
    traces = run_seed(cfg, 0)
    assert set(traces) == {"esdacd", "gossip", "heavyball"}
    t = traces["esdacd"].t
    assert t[0] == 0 and t[-1] == 300
    # paired schedules: identical sim_time columns across algorithms
    assert np.array_equal(traces["esdacd"].sim_time, traces["gossip"].sim_time)


def test_esdacd_resource_counters_per_iteration(tmp_path):
    cfg = load_config(write_cfg(tmp_path, GOSSIP_CFG))
    traces = run_seed(cfg, 1)
    tr = traces["esdacd"]
    assert np.array_equal(tr.messages, 2 * tr.t)
    assert np.array_equal(tr.gradients, 2 * tr.t)


def test_ssda_resource_counters_match_cost_table(tmp_path):
    cfg = load_config(write_cfg(tmp_path, SSDA_CFG))
    traces = run_seed(cfg, 0)
    tr = traces["ssda"]
    num_edges = 24  # 4x4 grid
    assert np.array_equal(tr.messages, 2 * num_edges * tr.t)
    assert np.array_equal(tr.gradients, 16 * tr.t)


def test_outputs_written_and_reproducible(tmp_path):
    cfg = load_config(write_cfg(tmp_path, GOSSIP_CFG))
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    run_experiment(cfg, outdir=out1)
    run_experiment(cfg, outdir=out2)
    files = sorted(p.name for p in out1.iterdir())
    assert "summary.csv" in files
    assert "esdacd_0.csv" in files and "gossip_3.csv" in files
    for name in files:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
    header = (out1 / "summary.csv").read_text().splitlines()[0]
    assert header == "algorithm,t,sim_time_mean,error_mean,error_q25,error_q75,messages,gradients"


def test_exponential_delays_fixed_per_run(tmp_path):
    text = GOSSIP_CFG.replace("delays = constant:1.0", "delays = exponential:1.0")
    cfg = load_config(write_cfg(tmp_path, text))
    from descent_mesh.experiments import _build_graph

    objs, _ = generate_dataset(cfg, 0)
    g0 = _build_graph(cfg, 0, objs)
    g0_again = _build_graph(cfg, 0, objs)
    g1 = _build_graph(cfg, 1, objs)
    assert np.array_equal(g0.tau, g0_again.tau)
    assert not np.array_equal(g0.tau, g1.tau)
    assert np.all(g0.tau > 0)


def test_worker_pool_matches_serial(tmp_path):
    cfg = load_config(write_cfg(tmp_path, GOSSIP_CFG))
    serial = run_experiment(cfg)
    pooled = run_experiment(cfg, workers=2)
    assert serial == pooled


def test_gossip_requires_averaging_family():
    with pytest.raises(ValueError):
        ExperimentConfig(algorithms=("gossip",), family="regression", iterations=10)


def test_dataset_dump_roundtrips(tmp_path):
    cfg = ExperimentConfig(topology="ring", n=4, family="regression", dim=3,
                           n_samples=6, iterations=1)
    paths = dump_datasets(cfg, 0, tmp_path)
    objs, _ = generate_dataset(cfg, 0)
    assert len(paths) == 4
    for path, obj in zip(paths, objs):
        feats, targets = load_node_dataset(path)
        assert np.array_equal(feats, obj.features)
        assert np.array_equal(targets, obj.targets)


def test_shipped_presets_parse():
    from pathlib import Path

    config_dir = Path(__file__).resolve().parent.parent / "configs"
    presets = sorted(config_dir.glob("*.cfg"))
    assert len(presets) >= 5
    for preset in presets:
        cfg = load_config(preset)
        assert cfg.n > 0 and cfg.seeds
        if "ssda" in cfg.algorithms and "esdacd" in cfg.algorithms:
            assert cfg.iterations == (cfg.n // 4) * cfg.ssda_iterations


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def test_cli_graph_params_assumptions(tmp_path):
    runner = CliRunner()
    gfile = tmp_path / "ring.graph"
    res = runner.invoke(cli_main, ["graph", "ring", "8", "-o", str(gfile)])
    assert res.exit_code == 0, res.output
    res = runner.invoke(cli_main, ["params", str(gfile)])
    assert res.exit_code == 0, res.output
    assert "theta = " in res.output and "sigma_a = " in res.output
    res = runner.invoke(cli_main, ["check-assumptions", str(gfile)])
    assert res.exit_code == 0, res.output
    assert "c_regularity = 1" in res.output


def test_cli_timing(tmp_path):
    runner = CliRunner()
    gfile = tmp_path / "grid.graph"
    runner.invoke(cli_main, ["graph", "grid2d", "9", "-o", str(gfile)])
    csv = tmp_path / "tmax.csv"
    res = runner.invoke(
        cli_main,
        ["timing", str(gfile), "--trials", "3", "--iters", "500", "--csv", str(csv)],
    )
    assert res.exit_code == 0, res.output
    assert "c_measured = " in res.output
    assert "bound_holds = True" in res.output
    lines = csv.read_text().splitlines()
    assert lines[0] == "k,t_max"
    assert len(lines) == 501


def test_cli_run(tmp_path):
    runner = CliRunner()
    cfgfile = write_cfg(tmp_path, GOSSIP_CFG.replace("seeds = 0-3", "seeds = 0"))
    outdir = tmp_path / "out"
    res = runner.invoke(cli_main, ["run", str(cfgfile), "--outdir", str(outdir)])
    assert res.exit_code == 0, res.output
    assert (outdir / "summary.csv").exists()
