#!/usr/bin/env python3
"""Averaging comparison: edge descent vs pairwise and heavy-ball gossip.

Runs the ring and grid presets and prints the mean final consensus error
per algorithm. Trace CSVs land in each preset's outdir.
"""

import argparse
from pathlib import Path

import numpy as np

from descent_mesh.experiments import load_config, run_experiment

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--configs", nargs="*", default=["gossip_ring100.cfg", "gossip_grid10.cfg"])
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    for name in args.configs:
        cfg = load_config(CONFIG_DIR / name)
        rows = run_experiment(cfg, workers=args.workers)
        final_t = max(r.t for r in rows if r.algorithm == cfg.algorithms[0])
        print(f"\n{name}: {cfg.topology} n={cfg.n}, {len(cfg.seeds)} seeds, "
              f"{cfg.iterations} iterations")
        for algo in cfg.algorithms:
            errs = [r.error for r in rows if r.algorithm == algo and r.t == final_t]
            print(f"  {algo:10s} mean final consensus error {np.mean(errs):.3e}")


if __name__ == "__main__":
    main()
