"""Least-squares B-spline smoothing and analytic derivative evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import BSpline

from .core import (
    ArgumentError,
    Grid,
    MultivariateFunctionalSample,
    NumericalError,
    _frozen,
)

DEFAULT_N_BASIS = 35
CUBIC = 4


@dataclass(frozen=True, eq=False)
class BSplineBasis:
    """Clamped B-spline basis with uniformly spaced interior knots.

    ``order`` is the polynomial degree plus one (4 for cubic splines).
    """

    order: int
    n_basis: int
    knots: np.ndarray

    @classmethod
    def uniform(cls, start: float, stop: float, n_basis: int = DEFAULT_N_BASIS, order: int = CUBIC):
        if order < 1:
            raise ArgumentError("order must be at least 1")
        if n_basis < order:
            raise ArgumentError(f"n_basis ({n_basis}) must be >= order ({order})")
        if not stop > start:
            raise ArgumentError("basis interval must have positive length")
        n_interior = n_basis - order
        breaks = np.linspace(start, stop, n_interior + 2)
        knots = np.concatenate([[start] * order, breaks[1:-1], [stop] * order])
        return cls(order, n_basis, _frozen(knots))

    @property
    def degree(self) -> int:
        return self.order - 1

    def design_matrix(self, t, deriv: int = 0) -> np.ndarray:
        """Matrix of basis functions (or their derivatives) at ``t``, shape ``(len(t), n_basis)``."""
        t = np.asarray(t, dtype=float)
        spline = BSpline(self.knots, np.eye(self.n_basis), self.degree, extrapolate=False)
        if deriv:
            spline = spline.derivative(deriv)
        out = spline(t)
        # right endpoint is excluded by the half-open convention of extrapolate=False
        at_end = t == self.knots[-1]
        if np.any(at_end):
            edge = BSpline(self.knots, np.eye(self.n_basis), self.degree, extrapolate=True)
            if deriv:
                edge = edge.derivative(deriv)
            out[at_end] = edge(t[at_end])
        return np.nan_to_num(out)


@dataclass(frozen=True, eq=False)
class SmoothedSample:
    """Spline coefficients of shape ``(n, p, n_basis)`` plus basis and grid."""

    coefficients: np.ndarray
    basis: BSplineBasis
    grid: Grid
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.ndim != 3 or c.shape[2] != self.basis.n_basis:
            raise ArgumentError(f"coefficients shape {c.shape} inconsistent with basis size {self.basis.n_basis}")
        if not np.all(np.isfinite(c)):
            raise NumericalError("non-finite spline coefficients")
        object.__setattr__(self, "coefficients", _frozen(c))

    @property
    def n(self) -> int:
        return self.coefficients.shape[0]

    @property
    def p(self) -> int:
        return self.coefficients.shape[1]


def fit_bspline(
    sample: MultivariateFunctionalSample,
    n_basis: int = DEFAULT_N_BASIS,
    order: int = CUBIC,
) -> SmoothedSample:
    """Fit every curve component by ordinary least squares on a shared basis."""
    if order < 2:
        raise ArgumentError("order must be at least 2")
    if n_basis < order:
        raise ArgumentError(f"n_basis ({n_basis}) must be >= order ({order})")
    if sample.m < n_basis:
        raise ArgumentError(
            f"ill-posed fit: {sample.m} grid points for {n_basis} basis functions"
        )
    t = sample.grid.points
    basis = BSplineBasis.uniform(t[0], t[-1], n_basis, order)
    design = basis.design_matrix(t)

    q, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * diag.max():
        empty = np.flatnonzero(np.abs(design).sum(axis=0) == 0)
        raise NumericalError(
            f"rank-deficient design matrix (n_basis={n_basis}, order={order}, "
            f"m={sample.m}, min |R_ii|={diag.min():.3g}, basis without data: {empty.tolist()})"
        )
    y = sample.values.reshape(-1, sample.m).T  # (m, n*p)
    coef = np.linalg.solve(r, q.T @ y)
    coef = coef.T.reshape(sample.n, sample.p, n_basis)
    return SmoothedSample(coef, basis, sample.grid, sample.labels)


def eval_derivative(smoothed: SmoothedSample, deriv_order: int = 0) -> MultivariateFunctionalSample:
    """Evaluate the fitted curves (or a derivative) at the original grid points."""
    if deriv_order not in (0, 1, 2):
        raise ArgumentError(f"deriv_order must be 0, 1 or 2, got {deriv_order}")
    if deriv_order > smoothed.basis.order - 2:
        raise ArgumentError(
            f"derivative {deriv_order} is not meaningful for splines of order {smoothed.basis.order}"
        )
    design = smoothed.basis.design_matrix(smoothed.grid.points, deriv=deriv_order)
    values = np.einsum("npb,mb->npm", smoothed.coefficients, design)
    return MultivariateFunctionalSample(values, smoothed.grid, smoothed.labels)


def smooth_and_derive(sample: MultivariateFunctionalSample, n_basis: int = DEFAULT_N_BASIS):
    """Smoothed curves and their first two derivatives, in that order."""
    fitted = fit_bspline(sample, n_basis)
    return tuple(eval_derivative(fitted, d) for d in (0, 1, 2))
