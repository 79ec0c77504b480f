"""Feature matrices, whitening and pairwise distances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..core import ArgumentError, NumericalError, _frozen

RIDGE = 1e-8
MAX_CONDITION = 1e10


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """``n x q`` table of finite features with named columns."""

    rows: np.ndarray
    column_names: Tuple[str, ...]

    def __post_init__(self):
        x = np.array(self.rows, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise ArgumentError("feature matrix must be two-dimensional")
        n, q = x.shape
        if n < 2 or q < 1:
            raise ArgumentError(f"feature matrix needs n >= 2 rows and q >= 1 columns, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ArgumentError("feature matrix contains non-finite values")
        names = tuple(str(c) for c in self.column_names)
        if len(names) != q:
            raise ArgumentError(f"{len(names)} column names for {q} columns")
        object.__setattr__(self, "rows", _frozen(x))
        object.__setattr__(self, "column_names", names)

    @classmethod
    def from_array(cls, rows, column_names: Sequence[str] = None) -> "FeatureMatrix":
        rows = np.asarray(rows, dtype=float)
        if rows.ndim == 1:
            rows = rows[:, None]
        if column_names is None:
            column_names = [f"x{j + 1}" for j in range(rows.shape[1])]
        return cls(rows, tuple(column_names))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def q(self) -> int:
        return self.rows.shape[1]


def as_array(data) -> np.ndarray:
    if isinstance(data, FeatureMatrix):
        return data.rows
    x = np.asarray(data, dtype=float)
    return x[:, None] if x.ndim == 1 else x


def whiten(data) -> np.ndarray:
    """Map rows so that the pooled covariance becomes the identity.

    Index features are often (nearly) collinear, e.g. the weighted MEI and
    MHI differ by a constant. When the covariance is badly conditioned a ridge
    of ``1e-8 * trace / q`` is added to its diagonal before factorisation.
    """
    x = as_array(data)
    n, q = x.shape
    cov = np.cov(x, rowvar=False).reshape(q, q)
    if np.linalg.cond(cov) > MAX_CONDITION:
        cov = cov + RIDGE * np.trace(cov) / q * np.eye(q)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"feature covariance is singular even after regularisation: {exc}") from None
    # rows @ inv(L).T, so that whitened covariance is inv(L) cov inv(L).T = I
    return np.linalg.solve(chol, (x - x.mean(axis=0)).T).T


def pairwise_distances(data, metric: str = "euclidean") -> np.ndarray:
    """Symmetric ``n x n`` distance matrix (Euclidean or Mahalanobis)."""
    x = as_array(data)
    if metric == "euclidean":
        return squareform(pdist(x))
    if metric == "mahalanobis":
        return pairwise_distances(whiten(x), "euclidean")
    raise ArgumentError(f"unknown metric {metric!r}; expected 'euclidean' or 'mahalanobis'")


def median_distance(data) -> float:
    """Median of the off-diagonal pairwise Euclidean distances."""
    return float(np.median(pdist(as_array(data))))
