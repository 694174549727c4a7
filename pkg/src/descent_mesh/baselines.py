"""Baselines: pairwise randomized gossip, heavy-ball gossip, and SSDA.

The two gossip variants consume the same pre-drawn Schedule as the edge
descent solver, so comparisons are paired seed by seed. SSDA is the
synchronous counterpart: accelerated gradient ascent on the dual with one
full gossip-matrix multiplication per iteration, costing 2E messages and
n gradients per step where the edge methods pay 2 and 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .esdacd import DivergenceError
from .graphs import Graph, incidence
from .timing import Schedule
from .trace import MetricContext, RunTrace, TraceBuilder

__all__ = [
    "GossipState",
    "SSDAState",
    "gossip_step",
    "heavyball_gossip_step",
    "run_gossip",
    "run_heavyball_gossip",
    "ssda_run",
    "ssda_iteration_time",
]


@dataclass
class GossipState:
    """Node values (and previous values for the heavy-ball variant)."""

    x: np.ndarray
    x_prev: np.ndarray | None = None
    t: int = 0


@dataclass
class SSDAState:
    """Dual iterate pair of SSDA; node estimates are grad f_i*(y row i)."""

    x: np.ndarray
    y: np.ndarray
    step: float
    momentum: float
    t: int = 0


def gossip_step(state: GossipState, edge) -> GossipState:
    """Replace the two endpoint values by their average."""
    i, j = edge
    mean = 0.5 * (state.x[i] + state.x[j])
    state.x[i] = mean
    state.x[j] = mean
    state.t += 1
    return state


def heavyball_gossip_step(state: GossipState, edge, omega: float, beta: float) -> GossipState:
    """Pairwise mixing with momentum.

    x_{t+1} = x_t + beta (x_t - x_{t-1}) - (omega/2) (e_i - e_j)(e_i - e_j)^T x_t.
    beta = 0, omega = 1 reduces to plain gossip.
    """
    if not 0.0 <= beta < 1.0:
        raise ValueError("beta must be in [0, 1)")
    i, j = edge
    prev = state.x if state.x_prev is None else state.x_prev
    x_new = state.x + beta * (state.x - prev)
    half_diff = 0.5 * omega * (state.x[i] - state.x[j])
    x_new[i] -= half_diff
    x_new[j] += half_diff
    state.x_prev = state.x
    state.x = x_new
    state.t += 1
    return state


def _record_loop(builder, metrics, record_callback, t, est, sim, msgs, grads):
    if not np.isfinite(est).all():
        raise DivergenceError(f"non-finite node values at iteration {t}")
    sub = metrics.max_suboptimality(est) if metrics is not None else float("nan")
    cons = metrics.consensus_error(est) if metrics is not None else float("nan")
    builder.add(t, sim, sub, cons, float("nan"), msgs, grads)
    if record_callback is not None:
        record_callback(t, est)


def run_gossip(graph: Graph, schedule: Schedule, x0, iterations: int, *,
               record_every: int = 0, sim_times=None,
               metrics: MetricContext | None = None,
               record_callback=None) -> RunTrace:
    """Pairwise randomized gossip over a pre-drawn schedule."""
    if iterations > len(schedule):
        raise ValueError("schedule is shorter than the requested iterations")
    x = np.asarray(x0, dtype=np.float64).reshape(graph.n, -1).copy()
    sched = schedule.edge_indices
    ends_i = graph.edges[:, 0].tolist()
    ends_j = graph.edges[:, 1].tolist()
    sim = None if sim_times is None else np.asarray(sim_times, dtype=np.float64)
    builder = TraceBuilder()

    def record(t):
        stime = 0.0 if t == 0 else (float(sim[t - 1]) if sim is not None else float("nan"))
        _record_loop(builder, metrics, record_callback, t, x, stime, 2 * t, 0)

    record(0)
    for t in range(iterations):
        e = int(sched[t])
        i = ends_i[e]
        j = ends_j[e]
        mean = 0.5 * (x[i] + x[j])
        x[i] = mean
        x[j] = mean
        done = t + 1
        if done == iterations or (record_every > 0 and done % record_every == 0):
            record(done)
    return builder.build(x)


def run_heavyball_gossip(graph: Graph, schedule: Schedule, x0, iterations: int, *,
                         omega: float = 1.0, beta: float = 0.5,
                         record_every: int = 0, sim_times=None,
                         metrics: MetricContext | None = None,
                         record_callback=None) -> RunTrace:
    """Heavy-ball gossip over a pre-drawn schedule; x_prev starts equal to x0."""
    if iterations > len(schedule):
        raise ValueError("schedule is shorter than the requested iterations")
    if not 0.0 <= beta < 1.0:
        raise ValueError("beta must be in [0, 1)")
    x = np.asarray(x0, dtype=np.float64).reshape(graph.n, -1).copy()
    x_prev = x.copy()
    sched = schedule.edge_indices
    ends = graph.edges
    sim = None if sim_times is None else np.asarray(sim_times, dtype=np.float64)
    builder = TraceBuilder()

    def record(t):
        stime = 0.0 if t == 0 else (float(sim[t - 1]) if sim is not None else float("nan"))
        _record_loop(builder, metrics, record_callback, t, x, stime, 2 * t, 0)

    record(0)
    for t in range(iterations):
        e = int(sched[t])
        i, j = ends[e]
        x_new = x + beta * (x - x_prev)
        half_diff = 0.5 * omega * (x[i] - x[j])
        x_new[i] -= half_diff
        x_new[j] += half_diff
        x_prev = x
        x = x_new
        done = t + 1
        if done == iterations or (record_every > 0 and done % record_every == 0):
            record(done)
    return builder.build(x)


def ssda_iteration_time(graph: Graph, include_compute: bool = False) -> float:
    """Simulated duration of one synchronous round.

    Every node computes a gradient and exchanges with all neighbors, so the
    round finishes when the slowest node has heard from its slowest edge.
    """
    worst = 0.0
    inc = graph.incident_edges()
    for r in range(graph.n):
        tau_max = max(float(graph.tau[e]) for e in inc[r])
        t = tau_max + (float(graph.delta_comp[r]) if include_compute else 0.0)
        worst = max(worst, t)
    return worst


def ssda_run(graph: Graph, objectives, iterations: int, *,
             gossip_matrix=None, record_every: int = 0,
             include_compute: bool = False,
             metrics: MetricContext | None = None,
             record_callback=None) -> RunTrace:
    """Accelerated dual ascent with one full gossip multiplication per step.

    With W the gossip matrix (defaults to A A^T from the graph weights),
    the dual iterate obeys x_{t+1} = y_t - eta W u_t with u the stacked
    conjugate gradients at y_t, followed by the Nesterov extrapolation
    y_{t+1} = x_{t+1} + m (x_{t+1} - x_t). Step size eta = sigma_min /
    lambda_max(W); momentum m = (1 - sqrt(g/k)) / (1 + sqrt(g/k)) with
    g the spectral gap of W and k = L_max / sigma_min.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    objectives = list(objectives)
    dim = objectives[0].dim
    n = graph.n
    if gossip_matrix is None:
        a = incidence(graph).matrix
        w = a @ a.T
    else:
        w = np.asarray(gossip_matrix, dtype=np.float64)
    eigs = np.linalg.eigvalsh(w)
    lam_max = float(eigs[-1])
    lam_min_plus = float(eigs[eigs > 1e-9 * lam_max].min())
    sigma_min = min(obj.sigma for obj in objectives)
    l_max = max(obj.smooth for obj in objectives)
    gap = lam_min_plus / lam_max
    kappa = l_max / sigma_min
    step = sigma_min / lam_max
    root = np.sqrt(gap / kappa)
    momentum = (1.0 - root) / (1.0 + root)

    iter_time = ssda_iteration_time(graph, include_compute=include_compute)
    num_edges = graph.num_edges
    x = np.zeros((n, dim))
    y = np.zeros((n, dim))
    z_cache: list = [None] * n
    builder = TraceBuilder()

    def estimates():
        out = np.empty((n, dim))
        for r, obj in enumerate(objectives):
            z = obj.grad_conjugate(y[r], x0=z_cache[r])
            z_cache[r] = z
            out[r] = z
        return out

    def record(t, est):
        _record_loop(builder, metrics, record_callback, t, est,
                     t * iter_time, 2 * num_edges * t, n * t)

    est = estimates()
    record(0, est)
    # overflow surfaces as DivergenceError at the next record
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(iterations):
            u = est  # conjugate gradients at y_t, one per node
            x_new = y - step * (w @ u)
            y = x_new + momentum * (x_new - x)
            x = x_new
            est = estimates()
            done = t + 1
            if done == iterations or (record_every > 0 and done % record_every == 0):
                record(done, est)
    return builder.build(est)
