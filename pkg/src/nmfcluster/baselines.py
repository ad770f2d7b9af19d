"""Comparison baselines: Lloyd k-means and a Jacobi-based spectral method.

The spectral baseline is the classical relaxation of ratio association:
take the top-K eigenvectors of the affinity matrix itself (not a
Laplacian) and cluster the embedded rows with k-means.  The eigensolver
is a cyclic Jacobi iteration, chosen for its simplicity and guaranteed
convergence on symmetric input; everything here runs at desk scale.
"""

from dataclasses import dataclass

import numpy as np

from .affinity import weights_array
from .core import as_matrix
from .errors import ConvergenceError, DomainError, RankError
from .metrics import Partition

__all__ = ["KmeansOptions", "kmeans", "jacobi_eigen", "spectral_ratio_assoc"]


@dataclass(frozen=True)
class KmeansOptions:
    k: int
    max_iterations: int = 100
    seed: int = 0
    restarts: int = 10
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.tolerance < 0.0:
            raise ValueError(f"tolerance must be >= 0, got {self.tolerance}")


def _sq_dists(points, centers):
    # (n, k) matrix of squared Euclidean distances
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _seed_plusplus(points, k, rng):
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[int(rng.integers(n))]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centers[c] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _lloyd(points, options, rng):
    """One seeded k-means run. Returns (labels, inertia, per-iteration inertia)."""
    n = points.shape[0]
    k = options.k
    centers = _seed_plusplus(points, k, rng)
    history = []
    for _ in range(options.max_iterations):
        d2 = _sq_dists(points, centers)
        labels = d2.argmin(axis=1)
        inertia = float(d2[np.arange(n), labels].sum())
        history.append(inertia)
        new_centers = centers.copy()
        for c in range(k):
            mask = labels == c
            if mask.any():
                new_centers[c] = points[mask].mean(axis=0)
            else:
                # re-seed an empty cluster to the point farthest from its center
                far = int(np.argmax(d2[np.arange(n), labels]))
                new_centers[c] = points[far]
        shift = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1).max()))
        centers = new_centers
        if shift <= options.tolerance:
            break
    d2 = _sq_dists(points, centers)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    history.append(inertia)
    return labels, inertia, history


def kmeans(points, options):
    """Best-of-restarts Lloyd iteration with k-means++ seeding.

    ``points`` holds one point per row (any sign; spectral embeddings are
    welcome).  Restart r uses seed options.seed + r; the lowest final
    inertia wins, earliest restart on ties.  Returns (Partition, inertia).
    """
    points = as_matrix(points, "points")
    if points.shape[0] < options.k:
        raise RankError(
            f"k={options.k} exceeds the number of points {points.shape[0]}"
        )
    best = None
    for r in range(options.restarts):
        rng = np.random.default_rng(options.seed + r)
        labels, inertia, _ = _lloyd(points, options, rng)
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    return Partition(best[0], options.k), best[1]


def jacobi_eigen(affinity, max_sweeps=100):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Rotations run until the off-diagonal Frobenius norm drops to
    1e-10 * ||W||_F.  Returns (eigenvalues descending, eigenvector matrix
    with matching columns).  Input asymmetric beyond 1e-10 is rejected.
    """
    w = weights_array(affinity)
    asym = float(np.abs(w - w.T).max())
    if asym > 1e-10:
        raise DomainError(f"matrix is asymmetric by {asym:.3e}; symmetrize it first")
    a = np.array(w, dtype=np.float64)
    n = a.shape[0]
    vecs = np.eye(n)
    norm = float(np.linalg.norm(a))
    if norm == 0.0 or n == 1:
        return np.diagonal(a).copy(), vecs
    threshold = 1e-10 * norm
    for _ in range(max_sweeps):
        # measure the off-diagonal mass directly; the difference form
        # ||A||^2 - ||diag||^2 cancels catastrophically near convergence
        off = a.copy()
        np.fill_diagonal(off, 0.0)
        if float(np.linalg.norm(off)) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau == 0.0:
                    t = 1.0
                elif abs(tau) > 1e150:
                    t = 0.5 / tau  # asymptotic root; tau*tau would overflow
                else:
                    t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                vp = vecs[:, p].copy()
                vq = vecs[:, q].copy()
                vecs[:, p] = c * vp - s * vq
                vecs[:, q] = s * vp + c * vq
    else:
        raise ConvergenceError(
            f"Jacobi iteration did not reach the off-diagonal threshold in "
            f"{max_sweeps} sweeps"
        )
    values = np.diagonal(a).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], vecs[:, order]


def spectral_ratio_assoc(affinity, k, seed=0):
    """Spectral baseline: k-means on the rows of the top-k eigenvectors of W."""
    w = weights_array(affinity)
    if k > w.shape[0]:
        raise RankError(f"k={k} exceeds the number of vertices {w.shape[0]}")
    if k < 1:
        raise RankError(f"k must be >= 1, got {k}")
    _, vecs = jacobi_eigen(w)
    embedding = vecs[:, :k]
    part, _ = kmeans(embedding, KmeansOptions(k=k, seed=seed))
    return part
