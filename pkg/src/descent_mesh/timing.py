"""Communication schedules and the idealized execution-time model.

Every run draws its edge sequence up front from a shared seed, so all
nodes (and all algorithms being compared on paired seeds) agree on the
same schedule without coordination.

PRNG contract
-------------
Schedules must be reproducible across implementations, so the generator is
pinned: Philox4x64 with 10 rounds (numpy's ``np.random.Philox``), keyed by
the schedule seed with the counter starting at zero. Each draw consumes
one raw 64-bit word r and maps it to u = r / 2^64; the sampled edge is the
inverse-CDF index over the edge probabilities in storage order, i.e. the
first e with u < cumsum(p)[e]. Reference raw words:

    key=0  -> 213000021201967259, 4455796210202625458, 2055444239878205049
    key=42 -> 15129985323320379406, 3490965594592278910, 16005516994917231875

Time model
----------
Node completion times follow the pairwise recursion: when edge (i, j) is
scheduled, both endpoints finish at max(t_i, t_j) + tau_ij, optionally
plus max(delta_i, delta_j) when compute times are enabled. T_max(k) is the
largest completion time over all nodes after k scheduled edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph

__all__ = [
    "Schedule",
    "TimingResult",
    "Theorem2Report",
    "sample_schedule",
    "simulate_times",
    "theorem2_report",
]


@dataclass(frozen=True, eq=False)
class Schedule:
    """Pre-drawn sequence of edge indices for one run."""

    seed: int
    edge_indices: np.ndarray

    def __post_init__(self):
        self.edge_indices.setflags(write=False)

    def __len__(self) -> int:
        return self.edge_indices.shape[0]


def sample_schedule(graph: Graph, seed: int, length: int) -> Schedule:
    """Draw `length` i.i.d. edges from the graph's edge distribution."""
    if length < 1:
        raise ValueError("schedule length must be >= 1")
    raw = np.random.Philox(key=np.uint64(seed)).random_raw(length)
    u = raw.astype(np.float64) * 2.0**-64
    cdf = np.cumsum(graph.p)
    idx = np.searchsorted(cdf, u, side="right")
    # guard against cumulative rounding pushing cdf[-1] below a draw
    np.minimum(idx, graph.num_edges - 1, out=idx)
    return Schedule(seed=int(seed), edge_indices=idx.astype(np.int64))


@dataclass(frozen=True, eq=False)
class TimingResult:
    """Per-node completion times and the running maximum T_max(k)."""

    t_node: np.ndarray
    t_max_at: np.ndarray
    avg_time_per_iter: float

    def __post_init__(self):
        self.t_node.setflags(write=False)
        self.t_max_at.setflags(write=False)


def simulate_times(graph: Graph, schedule: Schedule, include_compute: bool = False) -> TimingResult:
    """Replay a schedule through the pairwise completion-time recursion."""
    idx = schedule.edge_indices
    if idx.size and int(idx.max()) >= graph.num_edges:
        raise ValueError("schedule references edges outside the graph")
    ends = graph.edges
    per_edge = graph.tau.copy()
    if include_compute:
        per_edge = per_edge + np.maximum(
            graph.delta_comp[ends[:, 0]], graph.delta_comp[ends[:, 1]]
        )
    # plain-python loop: the recursion is a sequential scan, and local
    # float work beats per-step numpy dispatch by an order of magnitude
    ii = ends[idx, 0].tolist()
    jj = ends[idx, 1].tolist()
    dt = per_edge[idx].tolist()
    t = [0.0] * graph.n
    t_max_at = np.empty(len(idx))
    running = 0.0
    for k in range(len(idx)):
        i = ii[k]
        j = jj[k]
        a = t[i]
        b = t[j]
        done = (a if a > b else b) + dt[k]
        t[i] = done
        t[j] = done
        if done > running:
            running = done
        t_max_at[k] = running
    avg = running / len(idx) if len(idx) else 0.0
    return TimingResult(
        t_node=np.asarray(t), t_max_at=t_max_at, avg_time_per_iter=avg
    )


@dataclass(frozen=True)
class Theorem2Report:
    """Monte Carlo estimate of the average time per iteration.

    c_measured is tau_bar / (p_bar * tau_max) where p_bar is the largest
    per-node activation probability; the wide bound asserts c < 14 and a
    tighter c < 4 applies to regular graphs under uniform sampling.
    n_tau_ratio = n * tau_bar / tau_max is the quantity that stays bounded
    across sizes for quasi-regular families.
    """

    trials: int
    iterations: int
    tau_bar: float
    tau_max: float
    p_bar: float
    c_measured: float
    bound_holds: bool
    n_tau_ratio: float


def theorem2_report(
    graph: Graph,
    trials: int,
    length: int,
    seed: int = 0,
    include_compute: bool = False,
) -> Theorem2Report:
    """Estimate E[T_max(K)/K] over independent schedules and compare to the bound."""
    if trials < 1:
        raise ValueError("need at least one trial")
    totals = []
    for trial in range(trials):
        sched = sample_schedule(graph, seed + trial, length)
        res = simulate_times(graph, sched, include_compute=include_compute)
        totals.append(res.avg_time_per_iter)
    tau_bar = float(np.mean(totals))
    tau_max = float(graph.tau.max())
    if include_compute:
        tau_max += float(graph.delta_comp.max())
    p_bar = float(graph.node_probabilities().max())
    c = tau_bar / (p_bar * tau_max)
    return Theorem2Report(
        trials=trials,
        iterations=length,
        tau_bar=tau_bar,
        tau_max=tau_max,
        p_bar=p_bar,
        c_measured=c,
        bound_holds=bool(c < 14.0),
        n_tau_ratio=graph.n * tau_bar / tau_max,
    )
