"""Agglomerative hierarchical clustering cut into a fixed number of clusters."""

from __future__ import annotations

import numpy as np
from scipy.cluster.hierarchy import linkage as _scipy_linkage
from scipy.spatial.distance import squareform

from ..core import ArgumentError, Partition, canonical_labels

LINKAGES = ("single", "complete", "average", "centroid", "ward_d2")

_SCIPY_METHOD = {
    "single": "single",
    "complete": "complete",
    "average": "average",
    "centroid": "centroid",
    "ward_d2": "ward",
}
# these linkages update squared distances
_SQUARED = {"centroid", "ward_d2"}


def _check_distance_matrix(dist) -> np.ndarray:
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ArgumentError(f"distance matrix must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise ArgumentError("distances must be finite and nonnegative")
    if not np.allclose(d, d.T, rtol=0, atol=1e-12 * max(1.0, d.max(initial=0.0))):
        raise ArgumentError("distance matrix must be symmetric")
    return d


def _check_linkage(linkage: str) -> str:
    if linkage == "ward.D2":
        linkage = "ward_d2"
    if linkage not in LINKAGES:
        raise ArgumentError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    return linkage


def linkage_matrix(dist, linkage: str = "complete") -> np.ndarray:
    """Merge tree in SciPy's ``(n - 1) x 4`` format."""
    linkage = _check_linkage(linkage)
    d = _check_distance_matrix(dist)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return _scipy_linkage(squareform(d, checks=False), method=_SCIPY_METHOD[linkage])


def cut_tree(merges: np.ndarray, n: int, k: int) -> np.ndarray:
    """Labels after applying the first ``n - k`` merges of a SciPy-style tree."""
    parent = np.arange(2 * n - 1)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for step in range(n - k):
        a, b = int(merges[step, 0]), int(merges[step, 1])
        parent[find(a)] = n + step
        parent[find(b)] = n + step
    roots = np.array([find(i) for i in range(n)])
    return canonical_labels(roots)


def hierarchical(dist, linkage: str = "complete", k: int = 2) -> Partition:
    """Agglomerative clustering of a distance matrix cut to exactly ``k`` clusters."""
    d = _check_distance_matrix(dist)
    n = d.shape[0]
    if not 1 <= k <= n:
        raise ArgumentError(f"k must lie in 1..{n}, got {k}")
    if n == 1:
        return Partition(np.ones(1, dtype=int), 1)
    merges = linkage_matrix(d, linkage)
    labels = cut_tree(merges, n, k)
    return Partition(labels, k, extra={"heights": merges[:, 2].copy()})


def lance_williams(dist, linkage: str = "complete"):
    """Reference O(n^3) agglomeration using Lance-Williams updates.

    Ties are broken by the lowest pair of active cluster indices. Returns a
    list of ``(i, j, height)`` merges, where cluster ``j`` is absorbed into
    cluster ``i`` (``i < j``, indices of the original rows that represent the
    clusters).
    """
    linkage = _check_linkage(linkage)
    d = _check_distance_matrix(dist).copy()
    n = d.shape[0]
    squared = linkage in _SQUARED
    if squared:
        d = d ** 2
    size = np.ones(n)
    active = np.ones(n, dtype=bool)
    merges = []
    for _ in range(n - 1):
        idx = np.flatnonzero(active)
        sub = d[np.ix_(idx, idx)]
        iu = np.triu_indices(idx.size, 1)
        pos = int(np.argmin(sub[iu]))
        i, j = idx[iu[0][pos]], idx[iu[1][pos]]
        dij = d[i, j]
        merges.append((int(i), int(j), float(np.sqrt(dij) if squared else dij)))
        ni, nj = size[i], size[j]
        for kk in idx:
            if kk == i or kk == j:
                continue
            dik, djk, nk = d[i, kk], d[j, kk], size[kk]
            if linkage == "single":
                new = min(dik, djk)
            elif linkage == "complete":
                new = max(dik, djk)
            elif linkage == "average":
                new = (ni * dik + nj * djk) / (ni + nj)
            elif linkage == "centroid":
                new = (ni * dik + nj * djk) / (ni + nj) - ni * nj * dij / (ni + nj) ** 2
            else:
                tot = ni + nj + nk
                new = ((ni + nk) * dik + (nj + nk) * djk - nk * dij) / tot
            d[i, kk] = d[kk, i] = new
        size[i] = ni + nj
        active[j] = False
    return merges


def lance_williams_partition(dist, linkage: str, k: int) -> np.ndarray:
    """Labels from :func:`lance_williams` after ``n - k`` merges."""
    n = np.asarray(dist).shape[0]
    owner = np.arange(n)
    for i, j, _ in lance_williams(dist, linkage)[: n - k]:
        owner[owner == j] = i
    return canonical_labels(owner)
