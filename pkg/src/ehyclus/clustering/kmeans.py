"""Lloyd's k-means with k-means++ seeding and seeded restarts."""

from __future__ import annotations

import numpy as np

from ..core import ArgumentError, Partition, canonical_labels
from .distances import as_array, whiten

METRICS = ("euclidean", "mahalanobis")


def restart_generators(seed: int, restarts: int):
    """Independent generators for each restart, derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(restarts)
    return [np.random.default_rng(child) for child in children]


def kmeans_plus_plus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of ``k`` seed points drawn with D^2 weighting."""
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            nxt = int(rng.integers(n))
        chosen.append(nxt)
        np.minimum(d2, np.sum((x - x[nxt]) ** 2, axis=1), out=d2)
    return np.array(chosen)


def _sq_dists(x, centers):
    return np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)


def _repair_empty(labels, point_cost, k):
    """Move the points farthest from their centers into empty clusters."""
    counts = np.bincount(labels, minlength=k)
    if counts.min() > 0:
        return labels, False
    labels = labels.copy()
    cost = point_cost.copy()
    for c in np.flatnonzero(counts == 0):
        order = np.argsort(-cost, kind="stable")
        for idx in order:
            if counts[labels[idx]] > 1:
                counts[labels[idx]] -= 1
                labels[idx] = c
                counts[c] = 1
                cost[idx] = -np.inf
                break
    return labels, True


def lloyd(x: np.ndarray, centers: np.ndarray, max_iter: int = 300):
    """Run Lloyd iterations from the given centers.

    Returns ``(labels, objective, converged, history)`` where ``history`` is
    the objective after each assignment step, and labels are 0-based.
    """
    k = centers.shape[0]
    labels = None
    history = []
    converged = False
    for _ in range(max_iter):
        d2 = _sq_dists(x, centers)
        new = np.argmin(d2, axis=1)
        cost = d2[np.arange(x.shape[0]), new]
        new, repaired = _repair_empty(new, cost, k)
        history.append(float(d2[np.arange(x.shape[0]), new].sum()))
        if labels is not None and not repaired and np.array_equal(new, labels):
            converged = True
            break
        labels = new
        centers = np.array([x[labels == c].mean(axis=0) for c in range(k)])
    objective = float(_sq_dists(x, centers)[np.arange(x.shape[0]), labels].sum())
    return labels, objective, converged, history


def kmeans(
    data,
    k: int,
    metric: str = "euclidean",
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
) -> Partition:
    """k-means clustering; the best of ``restarts`` seeded runs is returned.

    The Mahalanobis variant whitens the data with the pooled covariance and
    then runs Euclidean Lloyd iterations, so its objective is measured in the
    whitened space.
    """
    x = as_array(data)
    n = x.shape[0]
    if metric not in METRICS:
        raise ArgumentError(f"unknown metric {metric!r}; expected one of {METRICS}")
    if not 1 <= k <= n:
        raise ArgumentError(f"k must lie in 1..{n}, got {k}")
    if restarts < 1:
        raise ArgumentError("restarts must be >= 1")
    if metric == "mahalanobis":
        x = whiten(x)

    best = None
    for rng in restart_generators(seed, restarts):
        seeds = kmeans_plus_plus(x, k, rng)
        labels, objective, converged, history = lloyd(x, x[seeds].copy(), max_iter)
        if best is None or objective < best[1]:
            best = (labels, objective, converged, history)
    labels, objective, converged, history = best
    return Partition(
        canonical_labels(labels), k, objective=objective, converged=converged,
        extra={"history": history},
    )
