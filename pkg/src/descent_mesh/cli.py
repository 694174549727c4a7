"""Command line interface.

Subcommands: graph (write a topology file), params (dump the stepper
parameters for a graph), timing (Monte Carlo time-per-iteration report),
check-assumptions (regularity constants), run (execute an experiment
config).
"""

from __future__ import annotations

import sys

import click
import numpy as np

from .experiments import load_config, run_experiment
from .graphs import build_topology, check_assumptions, load_graph, save_graph
from .spectral import compute_params
from .timing import sample_schedule, simulate_times, theorem2_report


@click.group()
def main():
    """Asynchronous accelerated dual coordinate descent, desk-scale toolkit."""


@main.command()
@click.argument("kind", type=click.Choice(["ring", "grid2d", "complete", "erdos_renyi"]))
@click.argument("n", type=int)
@click.option("-o", "--out", type=click.Path(), required=True, help="Output graph file.")
@click.option("--er-prob", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def graph(kind, n, out, er_prob, seed):
    """Build a named topology and write it as a text graph file."""
    g = build_topology(kind, n, prob=er_prob, seed=seed)
    save_graph(g, out)
    click.echo(f"wrote {kind} graph with {g.n} nodes, {g.num_edges} edges to {out}")


@main.command()
@click.argument("graphfile", type=click.Path(exists=True))
def params(graphfile):
    """Dump stepper parameters for a graph (unit curvatures) as key-value text."""
    g = load_graph(graphfile)
    ones = np.ones(g.n)
    sys.stdout.write(compute_params(g, ones, ones).dump())


@main.command()
@click.argument("graphfile", type=click.Path(exists=True))
@click.option("--trials", type=int, default=10, show_default=True)
@click.option("--iters", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--include-compute", is_flag=True, help="Add per-node compute times to each update.")
@click.option("--csv", "csv_path", type=click.Path(), default=None,
              help="Also write the per-k running maximum T_max as CSV.")
def timing(graphfile, trials, iters, seed, include_compute, csv_path):
    """Estimate the average time per iteration and report the bound constants."""
    g = load_graph(graphfile)
    report = theorem2_report(g, trials, iters, seed=seed, include_compute=include_compute)
    for name in ("trials", "iterations", "tau_bar", "tau_max", "p_bar",
                 "c_measured", "bound_holds", "n_tau_ratio"):
        value = getattr(report, name)
        if isinstance(value, float):
            click.echo(f"{name} = {value:.17g}")
        else:
            click.echo(f"{name} = {value}")
    if csv_path is not None:
        first = simulate_times(g, sample_schedule(g, seed, iters),
                               include_compute=include_compute)
        with open(csv_path, "w") as fh:
            fh.write("k,t_max\n")
            for k, val in enumerate(first.t_max_at, start=1):
                fh.write(f"{k},{val:.17g}\n")
        click.echo(f"wrote T_max curve to {csv_path}")


@main.command("check-assumptions")
@click.argument("graphfile", type=click.Path(exists=True))
def check_assumptions_cmd(graphfile):
    """Print the smallest constants satisfying the regularity assumptions."""
    g = load_graph(graphfile)
    report = check_assumptions(g)
    click.echo(f"c_regularity = {report.c_regularity:.17g}")
    click.echo(f"c_projector = {report.c_projector:.17g}")


@main.command()
@click.argument("config", type=click.Path(exists=True))
@click.option("--outdir", type=click.Path(), default=None,
              help="Override the config's output directory.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--dump-datasets", is_flag=True,
              help="Also write each seed's per-node dataset files.")
def run(config, outdir, workers, dump_datasets):
    """Run every (algorithm, seed) pair of an experiment config."""
    cfg = load_config(config)
    rows = run_experiment(cfg, outdir=outdir, workers=workers)
    target = outdir if outdir is not None else cfg.outdir
    if dump_datasets:
        if target is None:
            raise click.UsageError("--dump-datasets needs an output directory")
        from .experiments import dump_datasets as dump

        for seed in cfg.seeds:
            dump(cfg, seed, target)
    click.echo(f"recorded {len(rows)} metric rows"
               + (f"; outputs in {target}" if target else ""))


if __name__ == "__main__":
    main()
