#!/usr/bin/env python3
"""Edge descent vs the synchronous dual baseline on grid regression.

Homogeneous preset: reports the simulated-time ratio to reach a deep
target suboptimality. Heterogeneous preset: reports the error gap at the
largest common simulated time. Add --classification for the logistic run.
"""

import argparse
from pathlib import Path

import numpy as np

from descent_mesh.experiments import load_config, run_seed

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def interp_time(trace, target):
    err = trace.max_subopt
    below = err <= target
    if not below.any():
        return None
    k = int(np.argmax(below))
    if k == 0:
        return float(trace.sim_time[0])
    la, lb = np.log(err[k - 1]), np.log(max(err[k], 1e-300))
    frac = (la - np.log(target)) / (la - lb)
    return float(trace.sim_time[k - 1] + frac * (trace.sim_time[k] - trace.sim_time[k - 1]))


def error_at_cutoff(trace, cutoff):
    return float(trace.max_subopt[trace.sim_time <= cutoff][-1])


def homogeneous(workers_unused, target_rel):
    cfg = load_config(CONFIG_DIR / "ssda_regression_homogeneous.cfg")
    ratios = []
    for seed in cfg.seeds:
        traces = run_seed(cfg, seed)
        target = target_rel * float(traces["ssda"].max_subopt[0])
        t_e = interp_time(traces["esdacd"], target)
        t_s = interp_time(traces["ssda"], target)
        if t_e and t_s:
            ratios.append(t_e / t_s)
    print(f"homogeneous: time-to-{target_rel:g} ratio (edge descent / synchronous) "
          f"mean {np.mean(ratios):.2f} over {len(ratios)} seeds")


def heterogeneous(config_name, label):
    cfg = load_config(CONFIG_DIR / config_name)
    gaps = []
    for seed in cfg.seeds:
        traces = run_seed(cfg, seed)
        cutoff = min(traces["esdacd"].sim_time[-1], traces["ssda"].sim_time[-1])
        e_val = error_at_cutoff(traces["esdacd"], cutoff)
        s_val = error_at_cutoff(traces["ssda"], cutoff)
        gaps.append(np.log10(max(s_val, 1e-300)) - np.log10(max(e_val, 1e-300)))
    print(f"{label}: mean log10 error gap at matched time {np.mean(gaps):+.2f} "
          f"(positive favors edge descent) over {len(gaps)} seeds")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--target-rel", type=float, default=1e-10)
    parser.add_argument("--classification", action="store_true")
    args = parser.parse_args()
    homogeneous(None, args.target_rel)
    heterogeneous("ssda_regression_heterogeneous.cfg", "heterogeneous regression")
    if args.classification:
        heterogeneous("ssda_classification_heterogeneous.cfg", "heterogeneous classification")


if __name__ == "__main__":
    main()
