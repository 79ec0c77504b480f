"""Basic containers for multivariate functional data.

All curves of a sample share one time grid. Lebesgue measure of a time set is
approximated by the fraction of grid points at which a condition holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class EHyClusError(Exception):
    """Base class for all package errors."""


class ArgumentError(EHyClusError, ValueError):
    pass


class DimensionError(EHyClusError, ValueError):
    pass


class FormatError(EHyClusError, ValueError):
    pass


class DegeneracyError(EHyClusError, ArithmeticError):
    pass


class NumericalError(EHyClusError, ArithmeticError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Strictly increasing evaluation points on an interval."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).ravel()
        if pts.size < 2:
            raise ArgumentError("a grid needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise ArgumentError("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise ArgumentError("grid points must be strictly increasing")
        object.__setattr__(self, "points", _frozen(pts))

    @classmethod
    def uniform(cls, start: float, stop: float, m: int) -> "Grid":
        return cls(np.linspace(start, stop, m))

    @property
    def m(self) -> int:
        return self.points.size

    @property
    def interval_length(self) -> float:
        return float(self.points[-1] - self.points[0])

    def __len__(self) -> int:
        return self.m

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())


@dataclass(frozen=True, eq=False)
class MultivariateFunctionalSample:
    """``n`` curves with ``p`` components evaluated on a shared grid.

    ``values`` has shape ``(n, p, m)``. ``labels``, when given, are integer
    ground-truth cluster ids in ``1..K``.
    """

    values: np.ndarray
    grid: Grid
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim == 2:
            vals = vals[:, None, :]
        if vals.ndim != 3:
            raise DimensionError(f"values must have shape (n, p, m), got {vals.shape}")
        n, p, m = vals.shape
        if n < 1 or p < 1:
            raise DimensionError("need at least one curve and one dimension")
        if m != self.grid.m:
            raise DimensionError(f"values have {m} grid evaluations but grid has {self.grid.m}")
        if not np.all(np.isfinite(vals)):
            raise ArgumentError("sample values must be finite")
        object.__setattr__(self, "values", _frozen(vals))
        if self.labels is not None:
            object.__setattr__(self, "labels", _frozen(_check_labels(self.labels, n)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def m(self) -> int:
        return self.values.shape[2]

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def with_values(self, values: np.ndarray) -> "MultivariateFunctionalSample":
        return MultivariateFunctionalSample(values, self.grid, self.labels)

    def with_labels(self, labels) -> "MultivariateFunctionalSample":
        return MultivariateFunctionalSample(self.values, self.grid, labels)

    def equals(self, other: "MultivariateFunctionalSample") -> bool:
        same_labels = (self.labels is None and other.labels is None) or (
            self.labels is not None
            and other.labels is not None
            and np.array_equal(self.labels, other.labels)
        )
        return (
            self.grid == other.grid
            and np.array_equal(self.values, other.values)
            and same_labels
        )


def _check_labels(labels, n: int) -> np.ndarray:
    lab = np.asarray(labels)
    if lab.shape != (n,):
        raise DimensionError(f"labels must have length {n}, got shape {lab.shape}")
    if lab.dtype.kind == "f":
        if not np.all(np.isfinite(lab)) or np.any(lab != np.round(lab)):
            raise ArgumentError("labels must be integers")
    lab = lab.astype(np.int64)
    if lab.size and lab.min() < 1:
        raise ArgumentError("labels must be positive integers (1..K)")
    return lab


@dataclass(frozen=True, eq=False)
class Partition:
    """Cluster assignment with ids in ``1..k``.

    ``objective`` and ``converged`` are filled by iterative methods.
    """

    assignment: np.ndarray
    k: int
    objective: Optional[float] = None
    converged: bool = True
    extra: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        a = np.asarray(self.assignment)
        if a.ndim != 1:
            raise DimensionError("assignment must be one-dimensional")
        a = a.astype(np.int64)
        if self.k < 1:
            raise ArgumentError("k must be positive")
        if a.size and (a.min() < 1 or a.max() > self.k):
            raise ArgumentError(f"cluster ids must lie in 1..{self.k}")
        object.__setattr__(self, "assignment", _frozen(a))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        """Wrap arbitrary integer labels, relabeling them by first appearance."""
        a = canonical_labels(labels)
        return cls(a, int(a.max()) if a.size else 1)

    @property
    def n(self) -> int:
        return self.assignment.size

    def __len__(self) -> int:
        return self.n


def canonical_labels(labels) -> np.ndarray:
    """Relabel to ``1..k`` in order of first appearance."""
    labels = np.asarray(labels).ravel()
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse].astype(np.int64) + 1


def fraction_of_grid(mask, grid: Grid) -> float:
    """Share of grid points where ``mask`` is true."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 1 or mask.size != grid.m:
        raise DimensionError(f"mask length {mask.size} does not match grid size {grid.m}")
    return np.count_nonzero(mask) / grid.m


def restrict_dims(sample: MultivariateFunctionalSample, dims) -> MultivariateFunctionalSample:
    """Keep the given dimensions (1-based, in the given order)."""
    dims = list(dims)
    if not dims:
        raise ArgumentError("dims must be non-empty")
    if len(set(dims)) != len(dims):
        raise ArgumentError(f"dims must be distinct, got {dims}")
    for d in dims:
        if isinstance(d, bool) or int(d) != d or not 1 <= d <= sample.p:
            raise ArgumentError(f"dimension {d!r} out of range 1..{sample.p}")
    idx = [int(d) - 1 for d in dims]
    return MultivariateFunctionalSample(sample.values[:, idx, :].copy(), sample.grid, sample.labels)
