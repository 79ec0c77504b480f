"""Kernel k-means on a precomputed Gram matrix."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist, pdist

from ..core import ArgumentError, Partition, canonical_labels
from .distances import as_array
from .kmeans import _repair_empty, kmeans, restart_generators

KERNELS = ("gaussian", "polynomial")


def auto_sigma(data) -> float:
    """Gaussian width from the spread of squared pairwise distances.

    The inverse bandwidth is the average of the inverse 10% and 90% quantiles
    of the positive squared distances, as done by common kernel-method
    libraries; the width returned is ``1 / sqrt(2 * inverse_bandwidth)``.
    """
    d2 = pdist(as_array(data), "sqeuclidean")
    d2 = d2[d2 > 0]
    if d2.size == 0:
        return 1.0
    lo, hi = np.quantile(d2, [0.1, 0.9])
    inverse = 0.5 * (1.0 / lo + 1.0 / hi)
    return float(1.0 / np.sqrt(2.0 * inverse))


def gram_matrix(data, kernel: str = "gaussian", sigma=None, degree: int = 1,
                scale: float = 1.0, offset: float = 1.0) -> np.ndarray:
    """Gaussian ``exp(-|u-v|^2 / (2 sigma^2))`` or polynomial ``(scale <u,v> + offset)^degree``."""
    x = as_array(data)
    if kernel == "gaussian":
        if sigma is None:
            sigma = auto_sigma(x)
        if not sigma > 0:
            raise ArgumentError(f"kernel width must be positive, got {sigma}")
        d2 = cdist(x, x, "sqeuclidean")
        return np.exp(-d2 / (2.0 * sigma ** 2))
    if kernel == "polynomial":
        if degree < 1:
            raise ArgumentError("polynomial degree must be >= 1")
        return (scale * (x @ x.T) + offset) ** degree
    raise ArgumentError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")


def _feature_space_dists(gram, diag, labels, k):
    onehot = np.zeros((gram.shape[0], k))
    onehot[np.arange(gram.shape[0]), labels] = 1.0
    counts = onehot.sum(axis=0)
    kh = gram @ onehot
    within = np.einsum("ic,ic->c", onehot, kh) / counts ** 2
    return diag[:, None] - 2.0 * kh / counts + within[None, :]


def _seed_assignment(gram, diag, k, rng):
    """Kernel k-means++: pick seed points with feature-space D^2 weighting."""
    n = gram.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.maximum(diag + diag[chosen[0]] - 2.0 * gram[:, chosen[0]], 0.0)
    for _ in range(1, k):
        total = d2.sum()
        nxt = int(rng.choice(n, p=d2 / total)) if total > 0 else int(rng.integers(n))
        chosen.append(nxt)
        np.minimum(d2, np.maximum(diag + diag[nxt] - 2.0 * gram[:, nxt], 0.0), out=d2)
    seeds = np.array(chosen)
    to_seeds = diag[:, None] + diag[seeds][None, :] - 2.0 * gram[:, seeds]
    return np.argmin(to_seeds, axis=1)


def _spectral_start(gram, k, seed):
    """Assignment from the leading eigenvectors of the degree-normalised Gram
    matrix, or None when the kernel has negative entries or empty degrees.

    Weighted kernel k-means and normalised cuts share an objective, so this
    start often lands in a basin that point-based seeding misses.
    """
    if k < 2 or np.any(gram < 0):
        return None
    deg = gram.sum(axis=1)
    if not np.all(deg > 0):
        return None
    scaled = gram / np.sqrt(np.outer(deg, deg))
    _, vecs = np.linalg.eigh(scaled)
    emb = vecs[:, -k:]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    if not np.all(norms > 0):
        return None
    return kmeans(emb / norms, k, seed=seed).assignment - 1


def kernel_lloyd(gram: np.ndarray, labels: np.ndarray, k: int, max_iter: int = 300):
    diag = np.diag(gram).copy()
    n = gram.shape[0]
    labels, _ = _repair_empty(labels, np.zeros(n), k)
    converged = False
    for _ in range(max_iter):
        dist = _feature_space_dists(gram, diag, labels, k)
        new = np.argmin(dist, axis=1)
        new, repaired = _repair_empty(new, dist[np.arange(n), new], k)
        if not repaired and np.array_equal(new, labels):
            converged = True
            break
        labels = new
    dist = _feature_space_dists(gram, diag, labels, k)
    objective = float(dist[np.arange(n), labels].sum())
    return labels, objective, converged


def kernel_kmeans(
    data,
    k: int,
    kernel: str = "gaussian",
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
    sigma=None,
    degree: int = 1,
    scale: float = 1.0,
    offset: float = 1.0,
) -> Partition:
    """Kernel k-means; the Gaussian width defaults to :func:`auto_sigma`.

    Each restart seeds with kernel k-means++. For nonnegative kernels one extra
    start comes from the spectral embedding of the Gram matrix, and the run with
    the lowest objective wins.
    """
    x = as_array(data)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ArgumentError(f"k must lie in 1..{n}, got {k}")
    if restarts < 1:
        raise ArgumentError("restarts must be >= 1")
    gram = gram_matrix(x, kernel, sigma=sigma, degree=degree, scale=scale, offset=offset)
    diag = np.diag(gram).copy()
    best = None
    for rng in restart_generators(seed, restarts):
        start = _seed_assignment(gram, diag, k, rng)
        labels, objective, converged = kernel_lloyd(gram, start, k, max_iter)
        if best is None or objective < best[1]:
            best = (labels, objective, converged)
    start = _spectral_start(gram, k, seed)
    if start is not None:
        labels, objective, converged = kernel_lloyd(gram, start, k, max_iter)
        if objective < best[1]:
            best = (labels, objective, converged)
    labels, objective, converged = best
    return Partition(canonical_labels(labels), k, objective=objective, converged=converged)
