"""Per-node objective functions and their dual (conjugate-gradient) oracles.

Three families cover the experiments:

* quadratic consensus, f(x) = 0.5 ||x - c||^2, whose conjugate gradient is
  the shift x -> x + c. Curvatures are exactly 1.
* ridge regression, f(x) = 0.5 ||X^T x - y||^2 + reg ||x||^2 with X of
  shape (d, N). The conjugate gradient is one symmetric solve against the
  prefactored matrix X X^T + 2 reg I.
* l2-regularized logistic loss over labels in {-1, +1}. The conjugate
  gradient has no closed form and is found by a damped Newton iteration.

For every family, grad_conjugate(z) returns the unique x with grad(x) = z,
i.e. the gradient of the Fenchel conjugate at z. conjugate_value(z)
evaluates the conjugate itself through the identity f*(z) = <x, z> - f(x)
at x = grad_conjugate(z).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

__all__ = [
    "QuadraticObjective",
    "RidgeObjective",
    "LogisticObjective",
    "centralized_optimum",
    "save_node_dataset",
    "load_node_dataset",
]

NEWTON_MAX_ITER = 100


class QuadraticObjective:
    """Distance-to-a-point objective used for distributed averaging."""

    kind = "quadratic_consensus"

    def __init__(self, center):
        self.center = np.atleast_1d(np.asarray(center, dtype=np.float64))
        self.center.setflags(write=False)
        self.dim = self.center.shape[0]
        self.sigma = 1.0
        self.smooth = 1.0

    def value(self, x):
        d = x - self.center
        return 0.5 * float(d @ d)

    def value_many(self, xs):
        d = xs - self.center
        return 0.5 * np.einsum("md,md->m", d, d)

    def grad(self, x):
        return x - self.center

    def grad_conjugate(self, z, x0=None):
        return z + self.center

    def conjugate_value(self, z):
        x = z + self.center
        return float(x @ z) - self.value(x)

    def conjugate_bregman(self, z, z_ref):
        d = z - z_ref
        return 0.5 * float(d @ d)

    def quad_terms(self):
        """(H, b, const) with f(x) = 0.5 x^T H x - b^T x + const."""
        return np.eye(self.dim), self.center.copy(), 0.5 * float(self.center @ self.center)


class RidgeObjective:
    """Least squares with l2 penalty, f(x) = 0.5 ||X^T x - y||^2 + reg ||x||^2."""

    kind = "ridge_regression"

    def __init__(self, features, targets, reg):
        self.features = np.asarray(features, dtype=np.float64)
        self.targets = np.asarray(targets, dtype=np.float64)
        if self.features.ndim != 2 or self.targets.shape != (self.features.shape[1],):
            raise ValueError("features must be (d, N) and targets (N,)")
        self.reg = float(reg)
        self.dim = self.features.shape[0]
        gram = self.features @ self.features.T
        gram_eigs = np.linalg.eigvalsh(gram)
        self.sigma = float(gram_eigs[0]) + 2.0 * self.reg
        self.smooth = float(gram_eigs[-1]) + 2.0 * self.reg
        if self.sigma <= 0:
            raise ValueError("objective is not strongly convex; increase reg")
        self._hess = gram + 2.0 * self.reg * np.eye(self.dim)
        self._chol = cho_factor(self._hess)
        self._xy = self.features @ self.targets

    def value(self, x):
        r = self.features.T @ x - self.targets
        return 0.5 * float(r @ r) + self.reg * float(x @ x)

    def value_many(self, xs):
        r = xs @ self.features - self.targets
        return 0.5 * np.einsum("mn,mn->m", r, r) + self.reg * np.einsum("md,md->m", xs, xs)

    def grad(self, x):
        return self._hess @ x - self._xy

    def grad_conjugate(self, z, x0=None):
        return cho_solve(self._chol, z + self._xy)

    def conjugate_value(self, z):
        x = self.grad_conjugate(z)
        return float(x @ z) - self.value(x)

    def conjugate_bregman(self, z, z_ref):
        d = z - z_ref
        return 0.5 * float(d @ cho_solve(self._chol, d))

    def quad_terms(self):
        return self._hess.copy(), self._xy.copy(), 0.5 * float(self.targets @ self.targets)


class LogisticObjective:
    """l2-regularized logistic loss over labels in {-1, +1}.

    f(x) = sum_j log(1 + exp(-y_j X_j^T x)) + reg ||x||^2. Strong convexity
    comes only from the penalty (sigma = 2 reg); smoothness is bounded by
    0.25 lambda_max(X X^T) + 2 reg.
    """

    kind = "logistic"

    def __init__(self, features, labels, reg):
        self.features = np.asarray(features, dtype=np.float64)
        self.labels = np.asarray(labels, dtype=np.float64)
        if self.features.ndim != 2 or self.labels.shape != (self.features.shape[1],):
            raise ValueError("features must be (d, N) and labels (N,)")
        if not np.all(np.abs(self.labels) == 1.0):
            raise ValueError("labels must be -1 or +1")
        self.reg = float(reg)
        if self.reg <= 0:
            raise ValueError("logistic objective needs reg > 0 for strong convexity")
        self.dim = self.features.shape[0]
        gram_top = float(np.linalg.eigvalsh(self.features @ self.features.T)[-1])
        self.sigma = 2.0 * self.reg
        self.smooth = 0.25 * gram_top + 2.0 * self.reg

    def value(self, x):
        margins = self.labels * (self.features.T @ x)
        return float(np.sum(np.logaddexp(0.0, -margins))) + self.reg * float(x @ x)

    def value_many(self, xs):
        margins = (xs @ self.features) * self.labels
        return np.logaddexp(0.0, -margins).sum(axis=1) + self.reg * np.einsum("md,md->m", xs, xs)

    def grad(self, x):
        margins = self.labels * (self.features.T @ x)
        weights = self.labels / (1.0 + np.exp(margins))
        return -self.features @ weights + 2.0 * self.reg * x

    def _hessian(self, x):
        margins = self.labels * (self.features.T @ x)
        s = 1.0 / (1.0 + np.exp(-margins))
        w = s * (1.0 - s)
        return (self.features * w) @ self.features.T + 2.0 * self.reg * np.eye(self.dim)

    def grad_conjugate(self, z, x0=None):
        """Damped Newton solve of grad(x) = z, warm-startable through x0.

        Steps are accepted when they shrink the residual norm, which keeps
        the search robust both far from the solution (where full Newton
        overshoots into the flat logistic tails) and at convergence (where
        function-value tests would drown in cancellation).
        """
        z = np.asarray(z, dtype=np.float64)
        x = np.zeros(self.dim) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
        tol = 1e-10 * max(1.0, float(np.linalg.norm(z)))
        for _ in range(NEWTON_MAX_ITER):
            g = self.grad(x) - z
            gnorm = float(np.linalg.norm(g))
            if gnorm <= tol:
                return x
            step = np.linalg.solve(self._hessian(x), g)
            t = 1.0
            x_try = x - step
            for _ in range(60):
                if np.linalg.norm(self.grad(x_try) - z) <= (1.0 - 0.25 * t) * gnorm:
                    break
                t *= 0.5
                x_try = x - t * step
            x = x_try
        raise RuntimeError(
            f"conjugate-gradient Newton did not converge in {NEWTON_MAX_ITER} iterations"
        )

    def conjugate_value(self, z):
        x = self.grad_conjugate(z)
        return float(x @ z) - self.value(x)

    def conjugate_bregman(self, z, z_ref):
        # no closed form; direct difference is cancellation-limited near z_ref
        x_ref = self.grad_conjugate(z_ref)
        return self.conjugate_value(z) - self.conjugate_value(z_ref) - float(x_ref @ (z - z_ref))

    def quad_terms(self):
        return None


def centralized_optimum(objectives) -> tuple[np.ndarray, float]:
    """Minimize the sum of the local objectives over one shared parameter.

    Quadratic families reduce to a single dense solve. If any logistic
    objective is present, a Newton iteration is run on the aggregate until
    the gradient norm falls below 1e-12 * n.
    """
    dims = {obj.dim for obj in objectives}
    if len(dims) != 1:
        raise ValueError("objectives must share the same dimension")
    (dim,) = dims
    terms = [obj.quad_terms() for obj in objectives]
    h_tot = np.zeros((dim, dim))
    b_tot = np.zeros(dim)
    for term in terms:
        if term is not None:
            h, b, _ = term
            h_tot += h
            b_tot += b
    if all(term is not None for term in terms):
        x = np.linalg.solve(h_tot, b_tot)
        return x, float(sum(obj.value(x) for obj in objectives))

    # Mixed or logistic-only: Newton on the aggregate, seeded from the
    # quadratic part when there is one.
    if np.linalg.eigvalsh(h_tot)[0] > 0:
        x = np.linalg.solve(h_tot, b_tot)
    else:
        x = np.zeros(dim)
    tol = 1e-12 * len(objectives)
    for _ in range(NEWTON_MAX_ITER):
        g = np.zeros(dim)
        hess = np.zeros((dim, dim))
        for obj in objectives:
            g += obj.grad(x)
            if obj.kind == "logistic":
                hess += obj._hessian(x)
            else:
                hess += obj.quad_terms()[0]
        if float(np.linalg.norm(g)) <= tol:
            return x, float(sum(obj.value(x) for obj in objectives))
        x = x - np.linalg.solve(hess, g)
    raise RuntimeError("centralized Newton did not converge")


# ---------------------------------------------------------------------------
# Dataset files: one file per node, one sample per row, whitespace-separated
# features followed by the target/label. 17 significant digits per value so
# a save/load round trip is bit-identical.
# ---------------------------------------------------------------------------


def save_node_dataset(path, features, targets=None) -> None:
    """Write a (d, N) feature block and optional (N,) targets, one row per sample."""
    features = np.asarray(features, dtype=np.float64)
    with open(path, "w") as fh:
        for col in range(features.shape[1]):
            row = [f"{v:.17g}" for v in features[:, col]]
            if targets is not None:
                row.append(f"{targets[col]:.17g}")
            fh.write(" ".join(row) + "\n")


def load_node_dataset(path, supervised=True):
    """Read a node dataset back; returns (features (d, N), targets or None)."""
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                rows.append([float(v) for v in line.split()])
    data = np.asarray(rows, dtype=np.float64)
    if supervised:
        return data[:, :-1].T.copy(), data[:, -1].copy()
    return data.T.copy(), None
