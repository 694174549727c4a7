"""Communication graphs: topologies, incidence matrices, Laplacians.

A graph carries everything the samplers and the delay model need: one
positive weight ``mu`` per edge (the incidence column scale), a sampling
probability ``p`` per edge, a transmission delay ``tau`` per edge and a
compute time ``delta_comp`` per node. All arrays are frozen after
construction so graphs can be shared freely between runs.

Edges are stored as (i, j) pairs with i < j; the incidence column of edge
(i, j) is +mu at row i and -mu at row j. Every sign convention downstream
(edge gradients, node updates) relies on this single orientation rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "Graph",
    "IncidenceMatrix",
    "AssumptionReport",
    "graph_from_edges",
    "build_topology",
    "incidence",
    "laplacian",
    "check_assumptions",
    "graph_to_text",
    "graph_from_text",
    "save_graph",
    "load_graph",
]

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected communication graph with per-edge and per-node attributes.

    Attributes
    ----------
    n : int
        Number of nodes, labelled 0..n-1.
    edges : ndarray, shape (E, 2)
        Unordered node pairs stored as rows (i, j) with i < j.
    mu : ndarray, shape (E,)
        Positive incidence weights. The subgraph of edges with mu > 0 must
        be connected.
    p : ndarray, shape (E,)
        Edge sampling probabilities; must sum to one.
    tau : ndarray, shape (E,)
        Nonnegative communication delays (time units).
    delta_comp : ndarray, shape (n,)
        Nonnegative per-node gradient computation times.
    """

    n: int
    edges: np.ndarray
    mu: np.ndarray
    p: np.ndarray
    tau: np.ndarray
    delta_comp: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        num_edges = edges.shape[0]
        mu = np.asarray(self.mu, dtype=np.float64)
        p = np.asarray(self.p, dtype=np.float64)
        tau = np.asarray(self.tau, dtype=np.float64)
        delta = np.asarray(self.delta_comp, dtype=np.float64)
        if self.n < 2:
            raise ValueError("graph needs at least 2 nodes")
        for name, arr, length in (("mu", mu, num_edges), ("p", p, num_edges),
                                  ("tau", tau, num_edges), ("delta_comp", delta, self.n)):
            if arr.shape != (length,):
                raise ValueError(f"{name} must have shape ({length},), got {arr.shape}")
        if num_edges == 0:
            raise ValueError("graph has no edges")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ValueError("self-loops are not allowed")
        if np.any(edges < 0) or np.any(edges >= self.n):
            raise ValueError("edge endpoint out of range")
        ordered = np.sort(edges, axis=1)
        if len({(int(i), int(j)) for i, j in ordered}) != num_edges:
            raise ValueError("duplicate edges are not allowed")
        if np.any(ordered != edges):
            raise ValueError("edges must be stored with i < j")
        if np.any(mu < 0):
            raise ValueError("mu must be nonnegative")
        if np.any(tau < 0) or np.any(delta < 0):
            raise ValueError("delays and compute times must be nonnegative")
        if np.any(p < 0):
            raise ValueError("edge probabilities must be nonnegative")
        if abs(math.fsum(p.tolist()) - 1.0) > PROB_SUM_TOL:
            raise ValueError("edge probabilities must sum to 1 within 1e-12")
        live = [(int(i), int(j)) for (i, j), m in zip(edges, mu) if m > 0]
        if not _is_connected(self.n, live):
            raise ValueError("subgraph of positive-mu edges must be connected")
        for name, arr in (("edges", edges), ("mu", mu), ("p", p),
                          ("tau", tau), ("delta_comp", delta)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def edge_index(self) -> dict[tuple[int, int], int]:
        """Map (i, j) with i < j to the edge's storage index."""
        return {(int(i), int(j)): e for e, (i, j) in enumerate(self.edges)}

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self.edges[:, 0], 1)
        np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def node_probabilities(self) -> np.ndarray:
        """Per-node activation probability, the sum of incident edge probabilities."""
        prob = np.zeros(self.n)
        np.add.at(prob, self.edges[:, 0], self.p)
        np.add.at(prob, self.edges[:, 1], self.p)
        return prob

    def incident_edges(self) -> list[list[int]]:
        """Edge indices incident to each node."""
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for e, (i, j) in enumerate(self.edges):
            inc[int(i)].append(e)
            inc[int(j)].append(e)
        return inc

    def with_(self, **overrides) -> "Graph":
        """Copy with some attributes replaced (re-runs validation)."""
        return replace(self, **overrides)


@dataclass(frozen=True, eq=False)
class IncidenceMatrix:
    """Dense node-by-edge incidence matrix of a graph.

    Column e for edge (i, j) equals mu_e * (e_i - e_j); columns sum to zero
    and the matrix has rank n-1 whenever the positive-mu subgraph is
    connected. A @ A.T is the mu^2-weighted graph Laplacian.
    """

    matrix: np.ndarray
    graph: Graph

    def __post_init__(self):
        self.matrix.setflags(write=False)


def _is_connected(n: int, edge_list: list[tuple[int, int]]) -> bool:
    """BFS reachability of all nodes from node 0."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in edge_list:
        adj[i].append(j)
        adj[j].append(i)
    seen = [False] * n
    seen[0] = True
    stack = [0]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return all(seen)


def graph_from_edges(n, edge_list, mu=1.0, p=None, tau=1.0, delta_comp=0.0) -> Graph:
    """Build a graph from an explicit edge list, broadcasting scalar attributes.

    Edge probabilities default to uniform 1/E.
    """
    edges = np.asarray(sorted((min(i, j), max(i, j)) for i, j in edge_list), dtype=np.int64)
    num_edges = edges.shape[0]
    if p is None:
        p = np.full(num_edges, 1.0 / num_edges)
    return Graph(
        n=n,
        edges=edges,
        mu=np.broadcast_to(np.asarray(mu, dtype=np.float64), (num_edges,)).copy(),
        p=np.asarray(p, dtype=np.float64).copy(),
        tau=np.broadcast_to(np.asarray(tau, dtype=np.float64), (num_edges,)).copy(),
        delta_comp=np.broadcast_to(np.asarray(delta_comp, dtype=np.float64), (n,)).copy(),
    )


def build_topology(kind: str, n: int, prob: float = 0.1, seed: int = 0) -> Graph:
    """Construct a named topology with uniform defaults.

    Defaults are p = 1/E, mu = 1, tau = 1 and delta_comp = 0.

    Parameters
    ----------
    kind : {"ring", "grid2d", "complete", "erdos_renyi"}
    n : int
        Node count; grid2d requires a perfect square.
    prob, seed :
        Only used by erdos_renyi; the sample is retried (new draws from the
        same seeded generator) until connected, up to 1000 attempts.
    """
    if n < 2:
        raise ValueError("topologies need n >= 2")
    if kind == "ring":
        edge_list = [(i, (i + 1) % n) for i in range(n)]
    elif kind == "complete":
        edge_list = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif kind == "grid2d":
        side = math.isqrt(n)
        if side * side != n:
            raise ValueError(f"grid2d needs a perfect square node count, got {n}")
        edge_list = []
        for r in range(side):
            for c in range(side):
                u = r * side + c
                if c + 1 < side:
                    edge_list.append((u, u + 1))
                if r + 1 < side:
                    edge_list.append((u, u + side))
    elif kind == "erdos_renyi":
        rng = np.random.default_rng(seed)
        for _ in range(1000):
            mask = rng.random((n, n)) < prob
            edge_list = [(i, j) for i in range(n) for j in range(i + 1, n) if mask[i, j]]
            if edge_list and _is_connected(n, edge_list):
                break
        else:
            raise RuntimeError("no connected Erdos-Renyi sample within 1000 attempts")
    else:
        raise ValueError(f"unknown topology kind: {kind!r}")
    return graph_from_edges(n, edge_list, tau=1.0)


def incidence(graph: Graph) -> IncidenceMatrix:
    """Dense incidence matrix: column e is +mu_e at endpoint i, -mu_e at j."""
    mat = np.zeros((graph.n, graph.num_edges))
    cols = np.arange(graph.num_edges)
    mat[graph.edges[:, 0], cols] = graph.mu
    mat[graph.edges[:, 1], cols] = -graph.mu
    return IncidenceMatrix(matrix=mat, graph=graph)


def laplacian(graph: Graph) -> np.ndarray:
    """Unweighted graph Laplacian D - Adj (edge weights 1, mu ignored)."""
    lap = np.zeros((graph.n, graph.n))
    for i, j in graph.edges:
        lap[i, i] += 1.0
        lap[j, j] += 1.0
        lap[i, j] -= 1.0
        lap[j, i] -= 1.0
    return lap


@dataclass(frozen=True)
class AssumptionReport:
    """Smallest constants under which the two regularity assumptions hold.

    c_regularity bounds both p_max/p_min over edges and d_max/d_min over
    node degrees (quasi-regularity). c_projector bounds the largest
    diagonal entry of the unit-weight incidence projector against n/E
    (edge-removal symmetry).
    """

    c_regularity: float
    c_projector: float


def check_assumptions(graph: Graph) -> AssumptionReport:
    """Measure the graph against the quasi-regularity and projector assumptions."""
    from . import spectral  # deferred: spectral imports this module

    deg = graph.degrees().astype(float)
    c_reg = max(float(graph.p.max() / graph.p.min()), float(deg.max() / deg.min()))
    unit = graph.with_(mu=np.ones(graph.num_edges))
    proj = spectral.projector_diagonals(incidence(unit))
    c_proj = float(proj.max() * graph.num_edges / graph.n)
    return AssumptionReport(c_regularity=c_reg, c_projector=c_proj)


# ---------------------------------------------------------------------------
# Text serialization
# ---------------------------------------------------------------------------
#
# Format: header "n E", then E lines "i j mu p tau", then n lines "i delta".
# Floats use 17 significant digits so the round trip is exact for doubles.


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def graph_to_text(graph: Graph) -> str:
    lines = [f"{graph.n} {graph.num_edges}"]
    for e, (i, j) in enumerate(graph.edges):
        lines.append(f"{i} {j} {_fmt(graph.mu[e])} {_fmt(graph.p[e])} {_fmt(graph.tau[e])}")
    for i in range(graph.n):
        lines.append(f"{i} {_fmt(graph.delta_comp[i])}")
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> Graph:
    rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty graph text")
    n, num_edges = int(rows[0][0]), int(rows[0][1])
    if len(rows) != 1 + num_edges + n:
        raise ValueError("graph text has wrong number of lines")
    edges = np.zeros((num_edges, 2), dtype=np.int64)
    mu = np.zeros(num_edges)
    p = np.zeros(num_edges)
    tau = np.zeros(num_edges)
    for e in range(num_edges):
        i, j, m, pr, t = rows[1 + e]
        edges[e] = (int(i), int(j))
        mu[e], p[e], tau[e] = float(m), float(pr), float(t)
    delta = np.zeros(n)
    for k in range(n):
        i, d = rows[1 + num_edges + k]
        delta[int(i)] = float(d)
    return Graph(n=n, edges=edges, mu=mu, p=p, tau=tau, delta_comp=delta)


def save_graph(graph: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(graph_to_text(graph))


def load_graph(path) -> Graph:
    with open(path) as fh:
        return graph_from_text(fh.read())
