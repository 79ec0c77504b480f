"""Seeded generators for four bivariate benchmark datasets with known groups.

Every group draws from its own generator, keyed by ``(seed, dataset, group)``
through :class:`numpy.random.SeedSequence`, so groups can be produced
independently and in any order with the same result.

* ``ds1``: two groups on [0, 1] built from a truncated orthonormal series with
  correlated bivariate normal coefficients; the groups differ only in the mean.
* ``ds2``: two groups on [1, 21] made of tent functions with random Gaussian
  amplitudes and heavy white noise.
* ``ds3`` and ``ds4``: four groups on [1, 21] built from one random level
  ``U ~ Uniform(0, 0.1)`` and shifted tents.
"""

from __future__ import annotations

import numpy as np

from .core import ArgumentError, Grid, MultivariateFunctionalSample

DATASET_IDS = ("ds1", "ds2", "ds3", "ds4")
_CODES = {name: i + 1 for i, name in enumerate(DATASET_IDS)}

DS1_TERMS = 100
DS1_COVARIANCE = np.array([[1.0, 0.5], [0.5, 1.0]])

# (mean, variance) of U1, U2, U3 for ds2
DS2_COEFFICIENTS = ((0.5, 1.0 / 12.0), (0.0, 1.0 / 12.0), (0.0, 2.0 / 3.0))
TENT_NOISE_SD = 0.5


def group_rng(seed: int, dataset: str, group: int) -> np.random.Generator:
    """Generator for one group of one dataset."""
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ArgumentError(f"seed must be a nonnegative integer, got {seed!r}")
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(_CODES[dataset], group)))


def tent(t, height: float, center: float) -> np.ndarray:
    """``(height - |t - center|)_+``."""
    return np.maximum(height - np.abs(np.asarray(t, dtype=float) - center), 0.0)


def ds1_eigenvalues(n_terms: int = DS1_TERMS) -> np.ndarray:
    k = np.arange(1, n_terms + 1, dtype=float)
    return np.where(k <= 3, 1.0 / (k + 1.0), 1.0 / (k + 1.0) ** 2)


def ds1_basis(t, n_terms: int = DS1_TERMS) -> np.ndarray:
    """Rows are the constant, then alternating sines and cosines on [0, 1]."""
    t = np.asarray(t, dtype=float)
    out = np.empty((n_terms, t.size))
    for k in range(1, n_terms + 1):
        if k == 1:
            out[0] = 1.0
        elif k % 2 == 0:
            out[k - 1] = np.sqrt(2.0) * np.sin(k * np.pi * t)
        else:
            out[k - 1] = np.sqrt(2.0) * np.cos((k - 1) * np.pi * t)
    return out


def ds1_means(t, n_terms: int = DS1_TERMS):
    """Mean functions of both groups, each of shape ``(2, m)``."""
    t = np.asarray(t, dtype=float)
    e1 = np.vstack([t * (1 - t), 4 * t ** 2 * (1 - t)])
    shift = np.sqrt(ds1_eigenvalues(n_terms))[3:] @ ds1_basis(t, n_terms)[3:]
    return e1, e1 + shift[None, :]


def gen_ds1(seed: int = 0, n_per_group: int = 50, m: int = 150) -> MultivariateFunctionalSample:
    grid = Grid.uniform(0.0, 1.0, m)
    theta = ds1_basis(grid.points)
    scale = np.sqrt(ds1_eigenvalues())
    chol = np.linalg.cholesky(DS1_COVARIANCE)
    groups = []
    for g, mean in enumerate(ds1_means(grid.points), start=1):
        rng = group_rng(seed, "ds1", g)
        z = rng.standard_normal((n_per_group, DS1_TERMS, 2)) @ chol.T
        groups.append(mean[None] + np.einsum("ikd,k,km->idm", z, scale, theta))
    labels = np.repeat([1, 2], n_per_group)
    return MultivariateFunctionalSample(np.concatenate(groups), grid, labels)


def _ds2_coefficients(rng, n, coefficients):
    if coefficients == "gaussian":
        return [rng.normal(mu, np.sqrt(var), n) for mu, var in DS2_COEFFICIENTS]
    if coefficients == "uniform":
        # uniform law with the same mean and variance
        return [rng.uniform(mu - np.sqrt(3 * var), mu + np.sqrt(3 * var), n) for mu, var in DS2_COEFFICIENTS]
    raise ArgumentError(f"coefficients must be 'gaussian' or 'uniform', got {coefficients!r}")


def gen_ds2(seed: int = 0, n_per_group: int = 50, m: int = 1001,
            coefficients: str = "gaussian") -> MultivariateFunctionalSample:
    grid = Grid.uniform(1.0, 21.0, m)
    t = grid.points
    h1, h2, h3 = tent(t, 6, 11), tent(t, 6, 7), tent(t, 6, 15)
    trend = -5.0 + t / 2.0
    groups = []
    for g in (1, 2):
        rng = group_rng(seed, "ds2", g)
        u1, u2, u3 = (u[:, None] for u in _ds2_coefficients(rng, n_per_group, coefficients))
        eps = rng.standard_normal((n_per_group, 2, m))
        if g == 1:
            x1 = trend + u2 * h3 + u3 * h2 + np.sqrt(0.1) * eps[:, 0]
            x2 = trend + u1 * h1 + u2 * h2 + u3 * h3 + np.sqrt(0.5) * eps[:, 1]
        else:
            x1 = u3 * h2 + np.sqrt(10.0) * eps[:, 0]
            x2 = u1 * h1 + u3 * h3 + np.sqrt(0.5) * eps[:, 1]
        groups.append(np.stack([x1, x2], axis=1))
    labels = np.repeat([1, 2], n_per_group)
    return MultivariateFunctionalSample(np.concatenate(groups), grid, labels)


def _tent_groups(dataset, seed, recipes, n_per_group, m, noise_sd, u_high):
    """Curves ``U + (a - U) h`` per component for each ``((a1, h1), (a2, h2))`` recipe."""
    grid = Grid.uniform(1.0, 21.0, m)
    groups = []
    for g, recipe in enumerate(recipes, start=1):
        rng = group_rng(seed, dataset, g)
        u = rng.uniform(0.0, u_high, n_per_group)[:, None]
        eps = rng.standard_normal((n_per_group, 2, m))
        comps = [u + (a - u) * h[None, :] + noise_sd * eps[:, d] for d, (a, h) in enumerate(recipe)]
        groups.append(np.stack(comps, axis=1))
    labels = np.repeat(np.arange(1, len(recipes) + 1), n_per_group)
    return MultivariateFunctionalSample(np.concatenate(groups), grid, labels)


def gen_ds3(seed: int = 0, n_per_group: int = 250, m: int = 101,
            noise_sd: float = TENT_NOISE_SD, u_high: float = 0.1) -> MultivariateFunctionalSample:
    t = Grid.uniform(1.0, 21.0, m).points
    h1, h2 = tent(t, 6, 7), tent(t, 6, 15)
    recipes = (
        ((1.0, h1), (0.5, h1)),
        ((1.0, h2), (0.5, h2)),
        ((0.5, h1), (1.0, h1)),
        ((0.5, h2), (1.0, h2)),
    )
    return _tent_groups("ds3", seed, recipes, n_per_group, m, noise_sd, u_high)


def gen_ds4(seed: int = 0, n_per_group: int = 25, m: int = 101,
            noise_sd: float = TENT_NOISE_SD, u_high: float = 0.1) -> MultivariateFunctionalSample:
    t = Grid.uniform(1.0, 21.0, m).points
    h1, h2 = tent(t, 3, 7), tent(t, 6, 15)
    recipes = (
        ((1.5, h1), (1.0, h1)),
        ((1.0, h2), (0.5, h2)),
        ((1.0, h1), (1.0, h2)),
        ((0.5, h2), (0.5, h1)),
    )
    return _tent_groups("ds4", seed, recipes, n_per_group, m, noise_sd, u_high)


GENERATORS = {"ds1": gen_ds1, "ds2": gen_ds2, "ds3": gen_ds3, "ds4": gen_ds4}


def generate(dataset: str, seed: int = 0, **kwargs) -> MultivariateFunctionalSample:
    """Dispatch on a dataset id such as ``"ds3"``."""
    try:
        gen = GENERATORS[dataset.lower()]
    except KeyError:
        raise ArgumentError(f"unknown dataset {dataset!r}; expected one of {DATASET_IDS}") from None
    return gen(seed, **kwargs)
