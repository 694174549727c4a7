"""Run traces and the error metrics recorded into them.

All solvers emit the same trace schema so runs can be compared row by row:
iteration index, simulated time, maximum primal suboptimality
max_i F(theta_i) - F*, consensus error sum_i ||theta_i - target||^2, and
(edge-space runs only) the accelerated-descent potential. Baselines append
cumulative message and gradient counters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RunTrace", "MetricContext", "TraceBuilder"]

CSV_COLUMNS = ("t", "sim_time", "max_subopt", "consensus_err", "lyapunov")
RESOURCE_COLUMNS = ("messages", "gradients")


class MetricContext:
    """Precomputed global-objective pieces shared by every record.

    The suboptimality metric evaluates the full objective F at each node's
    estimate, so F is aggregated once: quadratic families collapse into a
    single (H, b, const) triple evaluated in O(d^2) per estimate; if any
    logistic term is present those terms are evaluated batched.
    """

    def __init__(self, objectives, x_star=None, f_star=None, consensus_target=None):
        self.objectives = list(objectives)
        self.x_star = None if x_star is None else np.asarray(x_star, dtype=np.float64)
        self.f_star = None if f_star is None else float(f_star)
        self.consensus_target = (
            None if consensus_target is None
            else np.atleast_1d(np.asarray(consensus_target, dtype=np.float64))
        )
        dim = self.objectives[0].dim
        h = np.zeros((dim, dim))
        b = np.zeros(dim)
        const = 0.0
        self._general = []
        for obj in self.objectives:
            terms = obj.quad_terms()
            if terms is None:
                self._general.append(obj)
            else:
                h += terms[0]
                b += terms[1]
                const += terms[2]
        self._quad = (h, b, const)

    def global_values(self, estimates: np.ndarray) -> np.ndarray:
        """F(theta_i) for every row of estimates (m, d) -> (m,)."""
        estimates = np.atleast_2d(estimates)
        h, b, const = self._quad
        vals = 0.5 * np.einsum("md,de,me->m", estimates, h, estimates)
        vals -= estimates @ b
        vals += const
        for obj in self._general:
            vals = vals + obj.value_many(estimates)
        return vals

    def max_suboptimality(self, estimates: np.ndarray) -> float:
        if self.f_star is None:
            return float("nan")
        return float(self.global_values(estimates).max() - self.f_star)

    def consensus_error(self, estimates: np.ndarray) -> float:
        if self.consensus_target is None:
            return float("nan")
        d = np.atleast_2d(estimates) - self.consensus_target
        return float(np.einsum("md,md->", d, d))


@dataclass(frozen=True, eq=False)
class RunTrace:
    """Recorded metrics of one run plus the final node estimates."""

    t: np.ndarray
    sim_time: np.ndarray
    max_subopt: np.ndarray
    consensus_err: np.ndarray
    lyapunov: np.ndarray
    messages: np.ndarray
    gradients: np.ndarray
    final_estimates: np.ndarray

    def write_csv(self, path, include_resources: bool = False) -> None:
        cols = CSV_COLUMNS + (RESOURCE_COLUMNS if include_resources else ())
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for k in range(self.t.shape[0]):
                row = [str(int(self.t[k]))]
                for name in cols[1:]:
                    val = getattr(self, name)[k]
                    if name in RESOURCE_COLUMNS:
                        row.append(str(int(val)))
                    else:
                        row.append(f"{val:.17g}")
                fh.write(",".join(row) + "\n")


class TraceBuilder:
    """Accumulates records during a run and freezes them into a RunTrace."""

    def __init__(self):
        self._rows: dict[str, list] = {name: [] for name in CSV_COLUMNS + RESOURCE_COLUMNS}

    def add(self, t, sim_time, max_subopt, consensus_err, lyapunov, messages, gradients):
        rows = self._rows
        rows["t"].append(t)
        rows["sim_time"].append(sim_time)
        rows["max_subopt"].append(max_subopt)
        rows["consensus_err"].append(consensus_err)
        rows["lyapunov"].append(lyapunov)
        rows["messages"].append(messages)
        rows["gradients"].append(gradients)

    def build(self, final_estimates: np.ndarray) -> RunTrace:
        return RunTrace(
            t=np.asarray(self._rows["t"], dtype=np.int64),
            sim_time=np.asarray(self._rows["sim_time"], dtype=np.float64),
            max_subopt=np.asarray(self._rows["max_subopt"], dtype=np.float64),
            consensus_err=np.asarray(self._rows["consensus_err"], dtype=np.float64),
            lyapunov=np.asarray(self._rows["lyapunov"], dtype=np.float64),
            messages=np.asarray(self._rows["messages"], dtype=np.int64),
            gradients=np.asarray(self._rows["gradients"], dtype=np.int64),
            final_estimates=final_estimates,
        )
