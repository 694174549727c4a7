#!/usr/bin/env python3
"""Plot trace CSVs from an experiment outdir (optional; needs matplotlib).

One curve per (algorithm, seed) file, error vs iteration or simulated time.
"""

import argparse
import csv
from collections import defaultdict
from pathlib import Path


def load_trace(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("outdir", type=Path)
    parser.add_argument("--x", choices=["t", "sim_time"], default="sim_time")
    parser.add_argument("--metric", choices=["max_subopt", "consensus_err"],
                        default="consensus_err")
    parser.add_argument("--save", type=Path, default=None)
    args = parser.parse_args()

    import matplotlib

    if args.save is not None:
        matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_algo = defaultdict(list)
    for path in sorted(args.outdir.glob("*_*.csv")):
        algo = path.stem.rsplit("_", 1)[0]
        by_algo[algo].append(path)

    fig, ax = plt.subplots(figsize=(7, 5))
    colors = {}
    for algo, paths in sorted(by_algo.items()):
        for k, path in enumerate(paths):
            rows = load_trace(path)
            xs = [float(r[args.x]) for r in rows]
            ys = [float(r[args.metric]) for r in rows]
            line, = ax.semilogy(xs, ys, alpha=0.4, lw=1.0,
                                color=colors.get(algo),
                                label=algo if k == 0 else None)
            colors.setdefault(algo, line.get_color())
    ax.set_xlabel(args.x)
    ax.set_ylabel(args.metric)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    if args.save is not None:
        fig.savefig(args.save, dpi=150)
        print(f"saved {args.save}")
    else:
        plt.show()


if __name__ == "__main__":
    main()
