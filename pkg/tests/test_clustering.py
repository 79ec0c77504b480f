import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ehyclus.clustering import (
    FeatureMatrix,
    auto_sigma,
    gaussian_affinity,
    gram_matrix,
    hierarchical,
    kernel_kmeans,
    kmeans,
    lance_williams,
    linkage_matrix,
    pairwise_distances,
    spectral,
    spectral_from_affinity,
    whiten,
)
from ehyclus.clustering.hierarchical import lance_williams_partition
from ehyclus.clustering.kmeans import lloyd
from ehyclus.core import ArgumentError, DegeneracyError, canonical_labels
from ehyclus.metrics import rand_index


def blobs(rng, n=20, spread=0.5):
    x = np.vstack([rng.normal(0, spread, (n, 2)), rng.normal(10, spread, (n, 2))])
    return x, np.repeat([1, 2], n)


def rings(rng, n=40):
    angle = rng.uniform(0, 2 * np.pi, 2 * n)
    radius = np.repeat([1.0, 5.0], n)
    x = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
    return x, np.repeat([1, 2], n)


def same_partition(a, b):
    return np.array_equal(canonical_labels(a), canonical_labels(b))


class TestFeatureMatrix:
    def test_validation(self):
        with pytest.raises(ArgumentError):
            FeatureMatrix(np.zeros((1, 2)), ("a", "b"))
        with pytest.raises(ArgumentError):
            FeatureMatrix(np.array([[0.0], [np.nan]]), ("a",))
        with pytest.raises(ArgumentError):
            FeatureMatrix(np.zeros((3, 2)), ("a",))

    def test_from_array(self):
        f = FeatureMatrix.from_array(np.arange(6.0).reshape(3, 2))
        assert f.column_names == ("x1", "x2")
        assert (f.n, f.q) == (3, 2)


class TestDistances:
    def test_examples(self):
        d = pairwise_distances(np.array([[0.0, 0.0], [3.0, 4.0], [0.0, 0.0]]))
        assert d[0, 1] == 5.0
        assert d[0, 2] == 0.0
        np.testing.assert_array_equal(d, d.T)
        np.testing.assert_array_equal(np.diag(d), 0)

    def test_mahalanobis_on_whitened(self, rng):
        x = rng.standard_normal((30, 3)) @ rng.standard_normal((3, 3))
        w = whiten(x)
        np.testing.assert_allclose(np.cov(w, rowvar=False), np.eye(3), atol=1e-10)
        np.testing.assert_allclose(pairwise_distances(w, "mahalanobis"), pairwise_distances(w), atol=1e-10)

    def test_mahalanobis_formula(self, rng):
        x = rng.standard_normal((15, 2)) * [1.0, 4.0]
        inv = np.linalg.inv(np.cov(x, rowvar=False))
        diff = x[0] - x[1]
        assert pairwise_distances(x, "mahalanobis")[0, 1] == pytest.approx(np.sqrt(diff @ inv @ diff))

    def test_collinear_columns_are_regularised(self, rng):
        a = rng.uniform(size=20)
        x = np.column_stack([a, 1.0 - a])
        d = pairwise_distances(x, "mahalanobis")
        assert np.all(np.isfinite(d))

    def test_unknown_metric(self):
        with pytest.raises(ArgumentError):
            pairwise_distances(np.zeros((3, 2)), "manhattan")


LINKAGE_NAMES = ("single", "complete", "average", "centroid", "ward_d2")


class TestHierarchical:
    @pytest.mark.parametrize("linkage", LINKAGE_NAMES)
    def test_separated_pairs(self, linkage):
        d = pairwise_distances(np.array([0.0, 1.0, 10.0, 11.0]))
        np.testing.assert_array_equal(hierarchical(d, linkage, 2).assignment, [1, 1, 2, 2])

    @pytest.mark.parametrize("linkage", LINKAGE_NAMES)
    def test_singletons(self, rng, linkage):
        d = pairwise_distances(rng.standard_normal((6, 2)))
        np.testing.assert_array_equal(hierarchical(d, linkage, 6).assignment, np.arange(1, 7))

    @pytest.mark.parametrize("linkage", ["single", "complete"])
    def test_chain_outlier(self, linkage):
        d = pairwise_distances(np.array([*range(10), 100.0]))
        part = hierarchical(d, linkage, 2).assignment
        assert set(np.flatnonzero(part == part[-1])) == {10}

    def test_alias_and_errors(self, rng):
        d = pairwise_distances(rng.standard_normal((5, 2)))
        assert same_partition(hierarchical(d, "ward.D2", 2).assignment, hierarchical(d, "ward_d2", 2).assignment)
        with pytest.raises(ArgumentError):
            hierarchical(d, "median", 2)
        with pytest.raises(ArgumentError):
            hierarchical(d, "single", 6)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(3, 14), st.sampled_from(LINKAGE_NAMES))
    def test_matches_lance_williams(self, seed, n, linkage):
        x = np.random.default_rng(seed).standard_normal((n, 2))
        d = pairwise_distances(x)
        heights = linkage_matrix(d, linkage)[:, 2]
        oracle = [h for _, _, h in lance_williams(d, linkage)]
        np.testing.assert_allclose(heights, oracle, rtol=1e-9, atol=1e-12)
        for k in range(1, n + 1):
            assert same_partition(hierarchical(d, linkage, k).assignment, lance_williams_partition(d, linkage, k))

    @pytest.mark.parametrize("linkage", ["single", "complete", "average", "ward_d2"])
    def test_monotone_heights(self, rng, linkage):
        d = pairwise_distances(rng.standard_normal((25, 3)))
        assert np.all(np.diff(hierarchical(d, linkage, 2).extra["heights"]) >= -1e-12)

    @pytest.mark.parametrize("linkage", LINKAGE_NAMES)
    def test_permutation_equivariance(self, rng, linkage):
        x = rng.standard_normal((12, 2))
        perm = rng.permutation(12)
        a = hierarchical(pairwise_distances(x), linkage, 3).assignment
        b = hierarchical(pairwise_distances(x[perm]), linkage, 3).assignment
        assert same_partition(a[perm], b)


class TestKMeans:
    @pytest.mark.parametrize("metric", ["euclidean", "mahalanobis"])
    def test_blobs(self, rng, metric):
        x, truth = blobs(rng)
        assert rand_index(kmeans(x, 2, metric, seed=1).assignment, truth) == 1.0

    def test_k_equals_n(self, rng):
        x = rng.standard_normal((6, 2))
        part = kmeans(x, 6, seed=3)
        assert part.objective == pytest.approx(0.0, abs=1e-20)
        assert sorted(part.assignment) == list(range(1, 7))

    def test_exhaustive_optimum(self, rng):
        x = rng.standard_normal((8, 2))
        best = np.inf
        for bits in itertools.product([0, 1], repeat=7):
            lab = np.array((0, *bits))
            if lab.min() == lab.max():
                continue
            best = min(best, sum(((x[lab == g] - x[lab == g].mean(0)) ** 2).sum() for g in (0, 1)))
        assert kmeans(x, 2, seed=0).objective == pytest.approx(best, rel=1e-12)

    def test_objective_monotone(self, rng):
        x = rng.standard_normal((60, 3))
        _, _, converged, history = lloyd(x, x[:4].copy(), 300)
        assert converged
        assert np.all(np.diff(history) <= 1e-12)

    def test_deterministic(self, rng):
        x = rng.standard_normal((40, 2))
        a, b = kmeans(x, 3, seed=9), kmeans(x, 3, seed=9)
        np.testing.assert_array_equal(a.assignment, b.assignment)
        assert a.objective == b.objective

    def test_objective_is_within_cluster_sum(self, rng):
        x = rng.standard_normal((30, 2))
        part = kmeans(x, 3, seed=0)
        sse = sum(((x[part.assignment == g] - x[part.assignment == g].mean(0)) ** 2).sum() for g in (1, 2, 3))
        assert part.objective == pytest.approx(sse, rel=1e-12)

    def test_row_permutation_equivariance(self, rng):
        x, _ = blobs(rng)
        perm = rng.permutation(x.shape[0])
        a = kmeans(x, 2, seed=0).assignment
        b = kmeans(x[perm], 2, seed=0).assignment
        assert same_partition(a[perm], b)

    def test_empty_cluster_repair(self):
        # duplicated points force empty clusters during seeding
        x = np.array([[0.0, 0.0]] * 5 + [[1.0, 1.0]])
        part = kmeans(x, 3, seed=0, restarts=2)
        assert np.unique(part.assignment).size == 3

    def test_errors(self, rng):
        x = rng.standard_normal((5, 2))
        with pytest.raises(ArgumentError):
            kmeans(x, 6)
        with pytest.raises(ArgumentError):
            kmeans(x, 2, "cosine")


class TestKernelKMeans:
    def test_single_cluster(self, rng):
        x, _ = blobs(rng)
        np.testing.assert_array_equal(kernel_kmeans(x, 1).assignment, 1)

    def test_linear_kernel_matches_kmeans(self, rng):
        x, _ = blobs(rng, spread=2.0)
        lin = kernel_kmeans(x, 2, "polynomial", seed=4)
        plain = kmeans(x, 2, seed=4)
        assert lin.objective == pytest.approx(plain.objective, rel=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_rings(self, seed):
        x, truth = rings(np.random.default_rng(seed))
        assert rand_index(kernel_kmeans(x, 2, "gaussian", seed=seed).assignment, truth) == 1.0

    def test_gram(self, rng):
        x = rng.standard_normal((5, 2))
        g = gram_matrix(x, "gaussian", sigma=2.0)
        np.testing.assert_allclose(np.diag(g), 1.0)
        assert g[0, 1] == pytest.approx(np.exp(-np.sum((x[0] - x[1]) ** 2) / 8.0))
        p = gram_matrix(x, "polynomial", degree=2, scale=0.5, offset=2.0)
        assert p[0, 1] == pytest.approx((0.5 * x[0] @ x[1] + 2.0) ** 2)
        with pytest.raises(ArgumentError):
            gram_matrix(x, "gaussian", sigma=0.0)
        with pytest.raises(ArgumentError):
            gram_matrix(x, "sigmoid")

    def test_auto_sigma(self, rng):
        x = rng.standard_normal((50, 2))
        d2 = np.sum((x[:, None] - x[None]) ** 2, axis=2)[np.triu_indices(50, 1)]
        lo, hi = np.quantile(d2, [0.1, 0.9])
        assert auto_sigma(x) == pytest.approx(1 / np.sqrt(lo ** -1 + hi ** -1))
        assert auto_sigma(np.zeros((4, 2))) == 1.0


class TestSpectral:
    def test_block_affinity(self):
        w = np.zeros((6, 6))
        w[:3, :3] = 1.0
        w[3:, 3:] = 1.0
        np.fill_diagonal(w, 0.0)
        np.testing.assert_array_equal(spectral_from_affinity(w, 2).assignment, [1, 1, 1, 2, 2, 2])

    def test_blobs(self, rng):
        x, truth = blobs(rng)
        assert rand_index(spectral(x, 2, seed=2).assignment, truth) == 1.0

    @pytest.mark.parametrize("seed", range(5))
    def test_rings(self, seed):
        x, truth = rings(np.random.default_rng(seed))
        assert rand_index(spectral(x, 2).assignment, truth) == 1.0

    def test_isolated_vertex(self):
        x = np.array([[0.0], [0.1], [1000.0]])
        with pytest.raises(DegeneracyError, match="larger sigma"):
            spectral(x, 2, sigma=0.01)

    def test_affinity(self, rng):
        x = rng.standard_normal((4, 2))
        w = gaussian_affinity(x, sigma=1.0)
        np.testing.assert_array_equal(np.diag(w), 0)
        assert w[0, 1] == pytest.approx(np.exp(-np.sum((x[0] - x[1]) ** 2) / 2))
