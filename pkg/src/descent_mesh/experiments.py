"""Experiment harness: configs, synthetic datasets, paired-seed runs, CSV output.

A config is flat key = value text with sections (configparser syntax); one
config plus a seed list fully determines every run. Per seed, all
algorithms share the same communication schedule, so comparisons are
paired. Outputs are one trace CSV per (algorithm, seed) plus a summary
of mean/quantile error per algorithm over iterations and simulated time.
"""

from __future__ import annotations

import configparser
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import baselines, esdacd
from .graphs import Graph, build_topology, laplacian
from .objectives import (
    LogisticObjective,
    QuadraticObjective,
    RidgeObjective,
    centralized_optimum,
    save_node_dataset,
)
from .spectral import compute_params
from .timing import Schedule, sample_schedule, simulate_times
from .trace import MetricContext, RunTrace

__all__ = [
    "ExperimentConfig",
    "MetricRow",
    "load_config",
    "generate_dataset",
    "generate_initial_values",
    "dump_datasets",
    "error_metric",
    "run_experiment",
    "run_seed",
    "write_outputs",
]

KNOWN_ALGORITHMS = ("esdacd", "gossip", "heavyball", "ssda")

# named sub-streams so dataset and delay draws never collide
_DATA_STREAM = 101
_DELAY_STREAM = 202


@dataclass(frozen=True)
class ExperimentConfig:
    topology: str = "ring"
    n: int = 20
    er_prob: float = 0.1
    algorithms: tuple = ("esdacd",)
    family: str = "averaging"  # averaging | regression | classification
    dim: int = 50
    n_samples: int = 150
    n_samples_range: tuple | None = None  # (lo, hi) for heterogeneous sizes
    noise_var: float = 0.25
    reg: float = 1.0
    mu_policy: str = "constant"  # constant | ssda_matched
    mu_value: float = 1.0
    delay: str = "constant"  # constant | exponential
    delay_value: float = 1.0
    include_compute: bool = False
    hb_omega: float = 1.0
    hb_beta: float = 0.5
    seeds: tuple = (0,)
    iterations: int = 0  # edge-sampled budget; derived from ssda when 0
    ssda_iterations: int = 0
    record_every: int = 0
    outdir: str | None = None

    def __post_init__(self):
        if self.family not in ("averaging", "regression", "classification"):
            raise ValueError(f"unknown objective family {self.family!r}")
        for algo in self.algorithms:
            if algo not in KNOWN_ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")
        if self.family == "averaging" and "ssda" in self.algorithms and self.mu_policy == "ssda_matched":
            pass  # legal, just unusual
        if "ssda" in self.algorithms and self.ssda_iterations < 0:
            raise ValueError("ssda_iterations must be >= 0")
        if self.family != "averaging":
            bad = {"gossip", "heavyball"} & set(self.algorithms)
            if bad:
                raise ValueError(f"{sorted(bad)} only run on the averaging family")
        edge_algos = [a for a in self.algorithms if a != "ssda"]
        if "ssda" in self.algorithms and edge_algos:
            expected = (self.n // 4) * self.ssda_iterations
            if self.iterations == 0:
                object.__setattr__(self, "iterations", expected)
            elif self.iterations != expected:
                raise ValueError(
                    "edge-sampled methods must run n/4 times more iterations than ssda "
                    f"({expected}), got {self.iterations}"
                )
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")

    @property
    def metric(self) -> str:
        return "consensus" if self.family == "averaging" else "max_subopt"


@dataclass(frozen=True)
class MetricRow:
    algorithm: str
    seed: int
    t: int
    sim_time: float
    error: float
    messages: int
    gradients: int


def _parse_seeds(text: str) -> tuple:
    text = text.strip()
    if "-" in text and "," not in text:
        lo, hi = text.split("-")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(v) for v in text.split(","))


def load_config(path) -> ExperimentConfig:
    """Parse a key = value config file into an ExperimentConfig."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(path)
    kwargs: dict = {}
    if parser.has_section("topology"):
        sec = parser["topology"]
        kwargs["topology"] = sec.get("kind", "ring")
        kwargs["n"] = sec.getint("n", 20)
        if "er_prob" in sec:
            kwargs["er_prob"] = sec.getfloat("er_prob")
    if parser.has_section("algorithms"):
        kwargs["algorithms"] = tuple(
            a.strip() for a in parser["algorithms"].get("run", "esdacd").split(",")
        )
    if parser.has_section("objective"):
        sec = parser["objective"]
        kwargs["family"] = sec.get("family", "averaging")
        if "dim" in sec:
            kwargs["dim"] = sec.getint("dim")
        if "samples" in sec:
            kwargs["n_samples"] = sec.getint("samples")
        if "samples_min" in sec or "samples_max" in sec:
            kwargs["n_samples_range"] = (sec.getint("samples_min"), sec.getint("samples_max"))
        if "noise_var" in sec:
            kwargs["noise_var"] = sec.getfloat("noise_var")
        if "reg" in sec:
            kwargs["reg"] = sec.getfloat("reg")
    if parser.has_section("policy"):
        sec = parser["policy"]
        mu = sec.get("mu", "constant:1.0")
        if mu.startswith("constant"):
            kwargs["mu_policy"] = "constant"
            kwargs["mu_value"] = float(mu.split(":")[1]) if ":" in mu else 1.0
        elif mu == "ssda_matched":
            kwargs["mu_policy"] = "ssda_matched"
        else:
            raise ValueError(f"unknown mu policy {mu!r}")
        delay = sec.get("delays", "constant:1.0")
        kind, _, value = delay.partition(":")
        if kind not in ("constant", "exponential"):
            raise ValueError(f"unknown delay model {kind!r}")
        kwargs["delay"] = kind
        kwargs["delay_value"] = float(value) if value else 1.0
        if "include_compute" in sec:
            kwargs["include_compute"] = sec.getboolean("include_compute")
        if "hb_omega" in sec:
            kwargs["hb_omega"] = sec.getfloat("hb_omega")
        if "hb_beta" in sec:
            kwargs["hb_beta"] = sec.getfloat("hb_beta")
    if parser.has_section("run"):
        sec = parser["run"]
        if "seeds" in sec:
            kwargs["seeds"] = _parse_seeds(sec["seeds"])
        if "iterations" in sec:
            kwargs["iterations"] = sec.getint("iterations")
        if "ssda_iterations" in sec:
            kwargs["ssda_iterations"] = sec.getint("ssda_iterations")
        if "record_every" in sec:
            kwargs["record_every"] = sec.getint("record_every")
    if parser.has_section("output") and "outdir" in parser["output"]:
        kwargs["outdir"] = parser["output"]["outdir"]
    return ExperimentConfig(**kwargs)


def generate_initial_values(cfg: ExperimentConfig) -> np.ndarray:
    """Averaging start: the first 10% of nodes hold 1, the rest 0."""
    ones = max(1, round(0.1 * cfg.n))
    values = np.zeros((cfg.n, 1))
    values[:ones] = 1.0
    return values


def generate_dataset(cfg: ExperimentConfig, seed: int):
    """Build the per-node objective list (and initial values for averaging).

    Regression nodes hold Gaussian features X (dim x N); sample targets are
    m + cos(m) + noise where m is the sample's feature mean. Classification
    features are Gaussians centered at -1/+1 per class, balanced, labels in
    {-1, +1}. Heterogeneous sizes draw N uniformly from n_samples_range.
    """
    if cfg.family == "averaging":
        values = generate_initial_values(cfg)
        return [QuadraticObjective(c) for c in values], values
    rng = np.random.default_rng([_DATA_STREAM, seed])
    objectives = []
    for _ in range(cfg.n):
        if cfg.n_samples_range is not None:
            lo, hi = cfg.n_samples_range
            n_samp = int(rng.integers(lo, hi + 1))
        else:
            n_samp = cfg.n_samples
        if cfg.family == "regression":
            feats = rng.standard_normal((cfg.dim, n_samp))
            means = feats.mean(axis=0)
            noise = rng.normal(0.0, np.sqrt(cfg.noise_var), size=n_samp)
            targets = means + np.cos(means) + noise
            objectives.append(RidgeObjective(feats, targets, cfg.reg))
        else:
            half = n_samp // 2
            labels = np.concatenate([-np.ones(half), np.ones(n_samp - half)])
            feats = rng.standard_normal((cfg.dim, n_samp)) + labels
            objectives.append(LogisticObjective(feats, labels, cfg.reg))
    return objectives, None


def dump_datasets(cfg: ExperimentConfig, seed: int, outdir) -> list:
    """Write one dataset file per node for a seed; returns the paths.

    Supervised families store features-then-target rows; averaging stores
    each node's value vector as a single featureless row.
    """
    objectives, values = generate_dataset(cfg, seed)
    target = Path(outdir) / f"datasets_seed{seed}"
    target.mkdir(parents=True, exist_ok=True)
    paths = []
    for r, obj in enumerate(objectives):
        path = target / f"node{r}.txt"
        if cfg.family == "averaging":
            save_node_dataset(path, np.asarray(values[r]).reshape(-1, 1))
        elif cfg.family == "regression":
            save_node_dataset(path, obj.features, obj.targets)
        else:
            save_node_dataset(path, obj.features, obj.labels)
        paths.append(path)
    return paths


def _build_graph(cfg: ExperimentConfig, seed: int, objectives) -> Graph:
    graph = build_topology(cfg.topology, cfg.n, prob=cfg.er_prob, seed=seed)
    if cfg.mu_policy == "constant":
        mu = np.full(graph.num_edges, cfg.mu_value)
    else:  # ssda_matched: mu_e^2 = p_e^2 / (1/sigma_i + 1/sigma_j)
        sigma = np.array([obj.sigma for obj in objectives])
        ends = graph.edges
        inv_sum = 1.0 / sigma[ends[:, 0]] + 1.0 / sigma[ends[:, 1]]
        mu = graph.p / np.sqrt(inv_sum)
    if cfg.delay == "constant":
        tau = np.full(graph.num_edges, cfg.delay_value)
    else:
        # one draw per edge per run; delays stay fixed for the whole run
        rng = np.random.default_rng([_DELAY_STREAM, seed])
        tau = rng.exponential(1.0 / cfg.delay_value, size=graph.num_edges)
    return graph.with_(mu=mu, tau=tau)


def error_metric(estimates, objectives, x_star_info, metric: str) -> float:
    """Evaluate the configured error metric at a block of node estimates."""
    x_star, f_star, target = x_star_info
    ctx = MetricContext(objectives, x_star=x_star, f_star=f_star, consensus_target=target)
    if metric == "consensus":
        return ctx.consensus_error(np.atleast_2d(estimates))
    return ctx.max_suboptimality(np.atleast_2d(estimates))


def _metrics_for(cfg: ExperimentConfig, objectives, values) -> MetricContext:
    if cfg.family == "averaging":
        target = np.asarray(values).mean(axis=0)
        x_star, f_star = centralized_optimum(objectives)
        return MetricContext(objectives, x_star=x_star, f_star=f_star, consensus_target=target)
    x_star, f_star = centralized_optimum(objectives)
    return MetricContext(objectives, x_star=x_star, f_star=f_star)


def run_seed(cfg: ExperimentConfig, seed: int) -> dict[str, RunTrace]:
    """Run every configured algorithm for one seed on a shared schedule."""
    objectives, values = generate_dataset(cfg, seed)
    graph = _build_graph(cfg, seed, objectives)
    metrics = _metrics_for(cfg, objectives, values)
    out: dict[str, RunTrace] = {}
    edge_algos = [a for a in cfg.algorithms if a != "ssda"]
    if edge_algos and cfg.iterations > 0:
        schedule = sample_schedule(graph, seed, cfg.iterations)
        times = simulate_times(graph, schedule, include_compute=cfg.include_compute)
        sim = times.t_max_at
    else:
        schedule = Schedule(seed=seed, edge_indices=np.empty(0, dtype=np.int64))
        sim = None
    for algo in cfg.algorithms:
        if algo == "esdacd":
            sigma = [obj.sigma for obj in objectives]
            smooth = [obj.smooth for obj in objectives]
            params = compute_params(graph, sigma, smooth)
            out[algo] = esdacd.run(
                "practical", graph, params, objectives, schedule, cfg.iterations,
                record_every=cfg.record_every, sim_times=sim, metrics=metrics,
            )
        elif algo == "gossip":
            out[algo] = baselines.run_gossip(
                graph, schedule, values, cfg.iterations,
                record_every=cfg.record_every, sim_times=sim, metrics=metrics,
            )
        elif algo == "heavyball":
            out[algo] = baselines.run_heavyball_gossip(
                graph, schedule, values, cfg.iterations,
                omega=cfg.hb_omega, beta=cfg.hb_beta,
                record_every=cfg.record_every, sim_times=sim, metrics=metrics,
            )
        elif algo == "ssda":
            out[algo] = baselines.ssda_run(
                graph, objectives, cfg.ssda_iterations,
                gossip_matrix=laplacian(graph),
                record_every=max(1, cfg.record_every // max(1, cfg.n // 4))
                if cfg.record_every else 0,
                include_compute=cfg.include_compute, metrics=metrics,
            )
    return out


def _rows_from_trace(cfg: ExperimentConfig, algo: str, seed: int, trace: RunTrace):
    err = trace.consensus_err if cfg.metric == "consensus" else trace.max_subopt
    return [
        MetricRow(
            algorithm=algo,
            seed=seed,
            t=int(trace.t[k]),
            sim_time=float(trace.sim_time[k]),
            error=float(err[k]),
            messages=int(trace.messages[k]),
            gradients=int(trace.gradients[k]),
        )
        for k in range(trace.t.shape[0])
    ]


def _seed_job(args):
    cfg, seed = args
    return seed, run_seed(cfg, seed)


def run_experiment(cfg: ExperimentConfig, outdir=None, workers: int = 1):
    """Run all seeds and algorithms; returns MetricRows sorted by (algo, seed).

    With workers > 1, seeds are dispatched to a process pool; results are
    merged in seed order so the output is identical either way.
    """
    jobs = [(cfg, seed) for seed in cfg.seeds]
    results: dict[int, dict[str, RunTrace]] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for seed, traces in pool.map(_seed_job, jobs):
                results[seed] = traces
    else:
        for job in jobs:
            seed, traces = _seed_job(job)
            results[seed] = traces
    rows: list[MetricRow] = []
    for algo in cfg.algorithms:
        for seed in cfg.seeds:
            rows.extend(_rows_from_trace(cfg, algo, seed, results[seed][algo]))
    target = outdir if outdir is not None else cfg.outdir
    if target is not None:
        write_outputs(rows, results, cfg, target)
    return rows


def write_outputs(rows, results, cfg: ExperimentConfig, outdir) -> None:
    """Write per-(algorithm, seed) trace CSVs and the summary CSV."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for seed, traces in results.items():
        for algo, trace in traces.items():
            trace.write_csv(out / f"{algo}_{seed}.csv", include_resources=True)
    by_key: dict[tuple, list[MetricRow]] = {}
    for row in rows:
        by_key.setdefault((row.algorithm, row.t), []).append(row)
    with open(out / "summary.csv", "w") as fh:
        fh.write("algorithm,t,sim_time_mean,error_mean,error_q25,error_q75,messages,gradients\n")
        for (algo, t) in sorted(by_key, key=lambda k: (k[0], k[1])):
            group = by_key[(algo, t)]
            errs = np.array([r.error for r in group])
            times = np.array([r.sim_time for r in group])
            fh.write(
                f"{algo},{t},{np.mean(times):.17g},{np.mean(errs):.17g},"
                f"{np.quantile(errs, 0.25):.17g},{np.quantile(errs, 0.75):.17g},"
                f"{group[0].messages},{group[0].gradients}\n"
            )
