"""Normalised spectral clustering (Ng, Jordan and Weiss scheme)."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from ..core import ArgumentError, DegeneracyError, Partition
from .distances import as_array
from .kernel_kmeans import auto_sigma
from .kmeans import kmeans


def gaussian_affinity(data, sigma=None) -> np.ndarray:
    x = as_array(data)
    if sigma is None:
        sigma = auto_sigma(x)
    if not sigma > 0:
        raise ArgumentError(f"sigma must be positive, got {sigma}")
    w = np.exp(-cdist(x, x, "sqeuclidean") / (2.0 * sigma ** 2))
    np.fill_diagonal(w, 0.0)
    return w


def spectral_embedding(affinity: np.ndarray, k: int) -> np.ndarray:
    """Row-normalised eigenvectors of the ``k`` smallest eigenvalues of
    ``I - D^-1/2 W D^-1/2``."""
    w = np.asarray(affinity, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ArgumentError("affinity must be a square matrix")
    degree = w.sum(axis=1)
    isolated = np.flatnonzero(degree <= np.finfo(float).tiny)
    if isolated.size:
        raise DegeneracyError(
            f"{isolated.size} isolated vertices (zero degree, e.g. row {isolated[0]}); "
            "try a larger sigma"
        )
    inv_sqrt = 1.0 / np.sqrt(degree)
    lap = np.eye(w.shape[0]) - inv_sqrt[:, None] * w * inv_sqrt[None, :]
    lap = 0.5 * (lap + lap.T)
    _, vecs = np.linalg.eigh(lap)
    emb = vecs[:, :k]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    return emb / np.where(norms > 0, norms, 1.0)


def spectral_from_affinity(affinity, k: int, seed: int = 0, restarts: int = 10) -> Partition:
    w = np.asarray(affinity, dtype=float)
    n = w.shape[0]
    if not 1 <= k <= n:
        raise ArgumentError(f"k must lie in 1..{n}, got {k}")
    emb = spectral_embedding(w, k)
    part = kmeans(emb, k, "euclidean", seed=seed, restarts=restarts)
    return Partition(part.assignment, k, objective=part.objective, converged=part.converged)


def spectral(data, k: int, sigma=None, seed: int = 0, restarts: int = 10) -> Partition:
    """Spectral clustering with a Gaussian affinity; ``sigma=None`` picks the
    width with :func:`~ehyclus.clustering.kernel_kmeans.auto_sigma`."""
    x = as_array(data)
    if not 1 <= k <= x.shape[0]:
        raise ArgumentError(f"k must lie in 1..{x.shape[0]}, got {k}")
    return spectral_from_affinity(gaussian_affinity(x, sigma), k, seed, restarts)
