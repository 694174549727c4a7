"""Spectral quantities behind the accelerated edge-descent step sizes.

Everything the optimizer needs is derived from the incidence matrix A and
the per-node curvature bounds (sigma_i, L_i):

* lambda_min_plus, lambda_max: extreme nonzero eigenvalues of A A^T (equal
  to those of A^T A).
* proj_diag[e] = e_e^T A^+A e_e, the diagonal of the orthogonal projector
  onto the row space of A. Entries lie in (0, 1] and sum to rank(A) = n-1.
* sigma_a = lambda_min_plus / L_max, a strong-convexity constant of the
  dual objective in the A^+A semi-norm.
* s_bound: S with S^2 = max_e proj_diag_e * mu_e^2 * p_e^-2 * (1/sigma_i + 1/sigma_j).
* theta: the per-iteration rate,
  theta^2 = min_e p_e^2 / (mu_e^2 proj_diag_e) * sigma_a / (1/sigma_i + 1/sigma_j),
  which is always >= sigma_a / S^2 and invariant to rescaling all mu.
* delta = theta (1 - theta) / (1 + theta), the companion mixing coefficient.
* eta[e] = (1/(1+theta)) * (mu_e^-2 (1/sigma_i + 1/sigma_j)^-1 + (p_e S^2)^-1),
  the per-edge step size.

A dense symmetric eigendecomposition is used throughout: at desk scale it
is exact enough, deterministic, and removes any iterative-solver tuning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, IncidenceMatrix, incidence

__all__ = [
    "SpectralParams",
    "eigen_laplacian",
    "projector_diagonals",
    "gram_projector",
    "compute_params",
]

# Eigenvalues below KERNEL_RTOL * lambda_max are treated as the kernel. The
# kernel of A A^T is one-dimensional by construction, so this threshold only
# needs to separate it from the spectral gap, which it does at desk scale.
KERNEL_RTOL = 1e-9

SYMMETRY_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class SpectralParams:
    """Scalars and per-edge arrays consumed by the edge-descent steppers."""

    lambda_min_plus: float
    lambda_max: float
    proj_diag: np.ndarray
    sigma_a: float
    s_bound: float
    theta: float
    delta: float
    eta: np.ndarray
    gamma: float

    def __post_init__(self):
        self.proj_diag.setflags(write=False)
        self.eta.setflags(write=False)

    def dump(self) -> str:
        """Key-value text with 17 significant digits per entry."""
        lines = [
            f"lambda_min_plus = {self.lambda_min_plus:.17g}",
            f"lambda_max = {self.lambda_max:.17g}",
            f"sigma_a = {self.sigma_a:.17g}",
            f"s_bound = {self.s_bound:.17g}",
            f"theta = {self.theta:.17g}",
            f"delta = {self.delta:.17g}",
            f"gamma = {self.gamma:.17g}",
        ]
        for e, (pd, et) in enumerate(zip(self.proj_diag, self.eta)):
            lines.append(f"proj_diag[{e}] = {pd:.17g}")
            lines.append(f"eta[{e}] = {et:.17g}")
        return "\n".join(lines) + "\n"


def eigen_laplacian(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full symmetric eigendecomposition with eigenvalues sorted ascending.

    Rejects matrices that are not symmetric within 1e-10 or not positive
    semi-definite (up to the same slack relative to the largest eigenvalue).
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(w - w.T), initial=0.0) > SYMMETRY_ATOL:
        raise ValueError("matrix is not symmetric within 1e-10")
    vals, vecs = np.linalg.eigh(w)
    if vals.size and vals[0] < -SYMMETRY_ATOL * max(1.0, abs(vals[-1])):
        raise ValueError("matrix is not positive semi-definite")
    return vals, vecs


def _nonzero_spectrum(inc: IncidenceMatrix):
    """Eigendecomposition of A A^T split into kernel and nonzero parts."""
    a = inc.matrix
    vals, vecs = eigen_laplacian(a @ a.T)
    lam_max = float(vals[-1])
    if lam_max <= 0.0:
        raise ValueError("incidence matrix is zero")
    keep = vals > KERNEL_RTOL * lam_max
    if int(keep.sum()) != inc.graph.n - 1:
        raise ValueError(
            "incidence matrix rank is not n-1 (positive-mu subgraph disconnected?)"
        )
    return vals[keep], vecs[:, keep], lam_max


def projector_diagonals(inc: IncidenceMatrix) -> np.ndarray:
    """Diagonal of A^+A, one entry per edge.

    Computed as sum_k lambda_k^-1 (u_k^T a_e)^2 over the nonzero eigenpairs
    of A A^T, where a_e is the incidence column of edge e. Entries are in
    (0, 1] and sum to n - 1.
    """
    vals, vecs, _ = _nonzero_spectrum(inc)
    m = vecs.T @ inc.matrix  # (n-1, E)
    return np.einsum("k,ke,ke->e", 1.0 / vals, m, m)


def gram_projector(inc: IncidenceMatrix) -> np.ndarray:
    """Full orthogonal projector A^+A onto the row space of A (E x E)."""
    vals, vecs, _ = _nonzero_spectrum(inc)
    m = vecs.T @ inc.matrix
    return m.T @ (m / vals[:, None])


def compute_params(graph: Graph, sigma, smooth) -> SpectralParams:
    """Derive all stepper parameters from a graph and per-node curvatures.

    Parameters
    ----------
    graph : Graph
    sigma, smooth : array_like, shape (n,)
        Per-node strong convexity sigma_i and smoothness L_i, with
        0 < sigma_i <= L_i.

    Raises
    ------
    ValueError
        If the curvatures are inconsistent or the resulting rate theta
        falls outside (0, 1]. theta = 1 is attained in degenerate
        single-edge problems and is accepted.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    smooth = np.asarray(smooth, dtype=np.float64)
    if sigma.shape != (graph.n,) or smooth.shape != (graph.n,):
        raise ValueError("sigma and smooth must have one entry per node")
    if np.any(sigma <= 0) or np.any(smooth < sigma):
        raise ValueError("need 0 < sigma_i <= L_i for every node")

    inc = incidence(graph)
    vals, _, lam_max = _nonzero_spectrum(inc)
    lam_min_plus = float(vals.min())
    proj = projector_diagonals(inc)

    ends = graph.edges
    inv_sum = 1.0 / sigma[ends[:, 0]] + 1.0 / sigma[ends[:, 1]]
    sigma_a = lam_min_plus / float(smooth.max())
    s_sq = float(np.max(proj * graph.mu**2 * inv_sum / graph.p**2))
    theta_sq = float(np.min(graph.p**2 / (graph.mu**2 * proj) * sigma_a / inv_sum))
    theta = float(np.sqrt(theta_sq))
    if theta > 1.0 and theta <= 1.0 + 1e-12:
        theta = 1.0
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"rate theta = {theta} outside (0, 1]; inconsistent inputs")
    delta = theta * (1.0 - theta) / (1.0 + theta)
    eta = (1.0 / (1.0 + theta)) * (1.0 / (graph.mu**2 * inv_sum) + 1.0 / (graph.p * s_sq))
    return SpectralParams(
        lambda_min_plus=lam_min_plus,
        lambda_max=lam_max,
        proj_diag=proj,
        sigma_a=sigma_a,
        s_bound=float(np.sqrt(s_sq)),
        theta=theta,
        delta=delta,
        eta=eta,
        gamma=lam_min_plus / lam_max,
    )
