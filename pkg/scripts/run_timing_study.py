#!/usr/bin/env python3
"""Average time per iteration under the pairwise completion-time model.

Prints the measured constant c = tau_bar / (p_bar tau_max) for several
topologies and the size-independence of n * tau_bar / tau_max on grids.
"""

import argparse

from descent_mesh.graphs import build_topology, graph_from_edges
from descent_mesh.timing import theorem2_report


def star(n):
    return graph_from_edges(n, [(0, i) for i in range(1, n)])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--iters", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    cases = [
        ("ring n=100", build_topology("ring", 100)),
        ("grid 10x10", build_topology("grid2d", 100)),
        ("complete n=40", build_topology("complete", 40)),
        ("star n=10", star(10)),
    ]
    print(f"{'case':<16} {'tau_bar':>9} {'p_bar':>7} {'c':>6}  c<14")
    for label, g in cases:
        rep = theorem2_report(g, args.trials, args.iters, seed=args.seed)
        print(f"{label:<16} {rep.tau_bar:9.4f} {rep.p_bar:7.4f} {rep.c_measured:6.2f}  {rep.bound_holds}")

    print("\nlinear speedup on grids (n * tau_bar / tau_max should stay flat):")
    for side in (4, 8, 16):
        g = build_topology("grid2d", side * side)
        rep = theorem2_report(g, args.trials, args.iters, seed=args.seed + 1)
        print(f"  {side:>2}x{side:<2} n={side * side:<4} n*tau_bar/tau_max = {rep.n_tau_ratio:.3f}")


if __name__ == "__main__":
    main()
