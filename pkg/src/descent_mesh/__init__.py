"""descent_mesh: asynchronous accelerated dual coordinate descent on networks.

Modules:
  graphs       communication graphs, incidence matrices, serialization
  spectral     eigen-derived stepper parameters (theta, delta, eta, ...)
  objectives   per-node objectives and their conjugate-gradient oracles
  esdacd       the edge-space and node-local solver forms
  baselines    pairwise gossip, heavy-ball gossip, SSDA
  timing       schedules and the idealized execution-time model
  experiments  config-driven paired-seed experiment harness
"""

from .baselines import run_gossip, run_heavyball_gossip, ssda_run
from .esdacd import (
    DivergenceError,
    EdgeSpaceState,
    LyapunovTracker,
    NodeState,
    power_of_b,
    run,
    step_formal,
    step_practical,
)
from .experiments import ExperimentConfig, MetricRow, load_config, run_experiment
from .graphs import (
    Graph,
    IncidenceMatrix,
    build_topology,
    check_assumptions,
    graph_from_edges,
    incidence,
    laplacian,
    load_graph,
    save_graph,
)
from .objectives import (
    LogisticObjective,
    QuadraticObjective,
    RidgeObjective,
    centralized_optimum,
)
from .spectral import SpectralParams, compute_params, eigen_laplacian, projector_diagonals
from .timing import Schedule, sample_schedule, simulate_times, theorem2_report
from .trace import MetricContext, RunTrace

__all__ = [
    "DivergenceError",
    "EdgeSpaceState",
    "ExperimentConfig",
    "Graph",
    "IncidenceMatrix",
    "LogisticObjective",
    "LyapunovTracker",
    "MetricContext",
    "MetricRow",
    "NodeState",
    "QuadraticObjective",
    "RidgeObjective",
    "RunTrace",
    "Schedule",
    "SpectralParams",
    "build_topology",
    "centralized_optimum",
    "check_assumptions",
    "compute_params",
    "eigen_laplacian",
    "graph_from_edges",
    "incidence",
    "laplacian",
    "load_config",
    "load_graph",
    "power_of_b",
    "projector_diagonals",
    "run",
    "run_experiment",
    "run_gossip",
    "run_heavyball_gossip",
    "sample_schedule",
    "save_graph",
    "simulate_times",
    "ssda_run",
    "step_formal",
    "step_practical",
    "theorem2_report",
]

__version__ = "0.1.0"
