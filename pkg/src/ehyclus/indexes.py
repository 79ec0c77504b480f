"""Epigraph and hypograph indexes for multivariate functional data.

Two families of multivariate indexes are provided:

* joint indexes, where a sample curve counts as above (below) a curve only
  when *all* of its components are simultaneously above (below);
* weighted indexes, a convex combination of the univariate indexes of each
  component (uniform or covariance-based weights).

Comparisons use ``>=`` and ``<=``, so equal values count towards both the
epigraph and the hypograph condition, and every curve of the sample counts
itself.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import (
    ArgumentError,
    DegeneracyError,
    DimensionError,
    MultivariateFunctionalSample,
    restrict_dims,
)

KINDS = ("EI", "HI", "MEI", "MHI", "wMEI", "wMHI")

# bound on the number of booleans materialised per comparison block
_BLOCK_ELEMENTS = 1 << 24


@dataclass(frozen=True, eq=False)
class IndexVector:
    values: np.ndarray
    kind: str
    dims_used: Tuple[int, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown index kind {self.kind!r}")
        v = np.array(self.values, dtype=float)
        if np.any(~np.isfinite(v)) or np.any(v < -1e-12) or np.any(v > 1 + 1e-12):
            raise ArgumentError(f"{self.kind} values must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "dims_used", tuple(int(d) for d in self.dims_used))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return self.values.size

    def __getitem__(self, item):
        return self.values[item]


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Nonnegative per-dimension weights summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0 or not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ArgumentError(f"weights must be finite and nonnegative, got {w}")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ArgumentError(f"weights must sum to 1, got sum {w.sum()!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, p: int) -> "WeightVector":
        return cls(np.full(p, 1.0 / p))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype)

    def __len__(self):
        return self.weights.size


def _dims(sample) -> Tuple[int, ...]:
    return tuple(range(1, sample.p + 1))


def _reference(sample, against):
    if against is None:
        return sample
    if against.p != sample.p or against.grid != sample.grid:
        raise DimensionError("reference sample must share dimensions and grid")
    return against


def _grid_counts(curves: np.ndarray, reference: np.ndarray):
    """Count, for each curve and each reference curve, the grid points at which
    the reference lies above (resp. below) the curve in every component.

    Returns two integer arrays of shape ``(n_curves, n_reference)``.
    """
    n_cur, p, m = curves.shape
    n_ref = reference.shape[0]
    # grid-major layout so that each comparison works on contiguous rows
    cur = np.ascontiguousarray(np.transpose(curves, (2, 1, 0)))
    ref = np.ascontiguousarray(np.transpose(reference, (2, 1, 0)))
    above = np.zeros((n_cur, n_ref), dtype=np.int64)
    below = np.zeros((n_cur, n_ref), dtype=np.int64)
    block = max(1, _BLOCK_ELEMENTS // max(1, n_ref))
    for start in range(0, n_cur, block):
        stop = min(start + block, n_cur)
        ge = np.empty((stop - start, n_ref), dtype=bool)
        le = np.empty_like(ge)
        tmp = np.empty_like(ge)
        for j in range(m):
            x = cur[j, :, start:stop, None]
            r = ref[j, :, None, :]
            np.greater_equal(r[0], x[0], out=ge)
            np.less_equal(r[0], x[0], out=le)
            for k in range(1, p):
                ge &= np.greater_equal(r[k], x[k], out=tmp)
                le &= np.less_equal(r[k], x[k], out=tmp)
            above[start:stop] += ge
            below[start:stop] += le
    return above, below


def ei_hi(sample: MultivariateFunctionalSample, against: Optional[MultivariateFunctionalSample] = None):
    """Joint epigraph and hypograph indexes of every curve of ``sample``.

    ``against`` is the reference sample (defaults to ``sample`` itself).
    """
    ref = _reference(sample, against)
    above, below = _grid_counts(sample.values, ref.values)
    m = sample.m
    n = ref.n
    ei = 1.0 - np.count_nonzero(above == m, axis=1) / n
    hi = np.count_nonzero(below == m, axis=1) / n
    dims = _dims(sample)
    return IndexVector(ei, "EI", dims), IndexVector(hi, "HI", dims)


def mei_mhi(sample: MultivariateFunctionalSample, against: Optional[MultivariateFunctionalSample] = None):
    """Joint modified epigraph and hypograph indexes.

    MEI is one minus the average share of the grid on which a reference curve
    has all components above the curve; MHI is the average share of the grid on
    which a reference curve has all components below it.
    """
    ref = _reference(sample, against)
    above, below = _grid_counts(sample.values, ref.values)
    total = ref.n * sample.m
    mei = 1.0 - above.sum(axis=1) / total
    mhi = below.sum(axis=1) / total
    dims = _dims(sample)
    return IndexVector(mei, "MEI", dims), IndexVector(mhi, "MHI", dims)


def _univariate_mei_mhi(sample: MultivariateFunctionalSample) -> Tuple[np.ndarray, np.ndarray]:
    """Per-dimension univariate MEI/MHI, shape ``(p, n)`` each, via ranks.

    At each grid point, the number of curves >= x (<= x) is obtained from
    sorted columns, giving an O(n log n * m) evaluation per dimension.
    """
    n, p, m = sample.shape
    mei = np.empty((p, n))
    mhi = np.empty((p, n))
    for k in range(p):
        vals = sample.values[:, k, :]
        srt = np.sort(vals, axis=0)
        n_ge = np.empty((n, m), dtype=np.int64)
        n_le = np.empty((n, m), dtype=np.int64)
        for j in range(m):
            col = srt[:, j]
            n_le[:, j] = np.searchsorted(col, vals[:, j], side="right")
            n_ge[:, j] = n - np.searchsorted(col, vals[:, j], side="left")
        mei[k] = 1.0 - n_ge.sum(axis=1) / (n * m)
        mhi[k] = n_le.sum(axis=1) / (n * m)
    return mei, mhi


def weighted_mei_mhi(sample: MultivariateFunctionalSample, weights):
    """Convex combination of the univariate MEI/MHI of each component."""
    if not isinstance(weights, WeightVector):
        weights = WeightVector(weights)
    w = weights.weights
    if w.size != sample.p:
        raise ArgumentError(f"expected {sample.p} weights, got {w.size}")
    mei, mhi = _univariate_mei_mhi(sample)
    dims = _dims(sample)
    return IndexVector(w @ mei, "wMEI", dims), IndexVector(w @ mhi, "wMHI", dims)


def uniform_mei_mhi(sample: MultivariateFunctionalSample):
    return weighted_mei_mhi(sample, WeightVector.uniform(sample.p))


def leading_eigenvalue(curves: np.ndarray) -> float:
    """Largest eigenvalue of the sample covariance matrix of ``curves`` (n x m).

    The nonzero spectrum of the m x m covariance equals that of the n x n
    centered Gram matrix, so the smaller of the two is decomposed.
    """
    n, m = curves.shape
    centered = curves - curves.mean(axis=0)
    if m <= n:
        mat = centered.T @ centered
    else:
        mat = centered @ centered.T
    return float(np.linalg.eigvalsh(mat / (n - 1))[-1])


def covariance_weights(sample: MultivariateFunctionalSample) -> WeightVector:
    """Weights inversely proportional to each component's leading covariance eigenvalue."""
    if sample.n < 2:
        raise ArgumentError("covariance weights need at least 2 curves")
    lam = np.array([leading_eigenvalue(sample.values[:, k, :]) for k in range(sample.p)])
    for k, value in enumerate(lam):
        scale = float(np.mean(sample.values[:, k, :] ** 2))
        if not value > 1e-12 * scale or value <= np.finfo(float).tiny:
            raise DegeneracyError(
                f"dimension {k + 1} has no variability (leading eigenvalue {value:.3g})"
            )
    q = 1.0 / lam
    w = q / q.sum()
    # absorb the last rounding error so the sum is 1 to machine precision
    w[-1] = 1.0 - w[:-1].sum()
    return WeightVector(w)


def covariance_mei_mhi(sample: MultivariateFunctionalSample):
    return weighted_mei_mhi(sample, covariance_weights(sample))


def subset_mei_mhi(sample: MultivariateFunctionalSample, dims: Sequence[int]):
    """Joint MEI/MHI computed on a subset of the dimensions (1-based)."""
    mei, mhi = mei_mhi(restrict_dims(sample, dims))
    used = tuple(int(d) for d in dims)
    return IndexVector(mei.values, "MEI", used), IndexVector(mhi.values, "MHI", used)


def relation_residual(sample: MultivariateFunctionalSample) -> np.ndarray:
    """Residual of the identity linking joint MHI, MEI and the subset MHIs.

    For ``p`` dimensions and ``n`` curves the identity reads::

        MHI + (-1)^p MEI = sum_{r=1}^{p-1} sum_{|J|=r} (-1)^(r+p+1) MHI_J + (-1)^(p+1)/n + rest

    where ``rest`` only collects grid points at which two distinct curves tie
    in some component. The returned vector is LHS minus the explicit RHS terms,
    which is zero for tie-free samples.
    """
    p, n = sample.p, sample.n
    mei, mhi = mei_mhi(sample)
    lhs = mhi.values + (-1) ** p * mei.values
    rhs = np.full(n, (-1) ** (p + 1) / n)
    for r in range(1, p):
        sign = (-1) ** (r + p + 1)
        for dims in itertools.combinations(range(1, p + 1), r):
            rhs = rhs + sign * subset_mei_mhi(sample, dims)[1].values
    return lhs - rhs
