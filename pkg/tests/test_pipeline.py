import csv

import numpy as np
import pytest

from ehyclus.clustering import FeatureMatrix
from ehyclus.core import ArgumentError, DegeneracyError, Grid, MultivariateFunctionalSample
from ehyclus.io import ResultRow
from ehyclus.metrics import EvaluationReport
from ehyclus.pipeline import (
    DATASETS,
    METHODS,
    WORKERS_ENV,
    PipelineConfig,
    aggregate,
    bench,
    build_index_datasets,
    cell_seed,
    combination_name,
    emit_plot_data,
    partitions_table,
    replicate_seed,
    run_grid,
    run_sample,
)
from ehyclus.simulate import gen_ds1, gen_ds4
from ehyclus.smoothing import fit_bspline

TABLE_NAMES = {
    "_.MEIMHI", "d.MEIMHI", "d2.MEIMHI", "_d.MEIMHI", "_d2.MEIMHI", "dd2.MEIMHI", "_dd2.MEIMHI",
    "_d.MEI", "_d2.MEI", "dd2.MEI", "_dd2.MEI", "_d.MHI", "_d2.MHI", "dd2.MHI", "_dd2.MHI",
}


@pytest.fixture(scope="module")
def ds1():
    return gen_ds1(0)


@pytest.fixture(scope="module")
def ds1_features(ds1):
    return build_index_datasets(fit_bspline(ds1))


@pytest.fixture(scope="module")
def ds1_cells(ds1):
    return run_sample(ds1, PipelineConfig(timing=False))


def test_catalog():
    assert set(DATASETS) == TABLE_NAMES
    assert len(METHODS) == 10
    assert DATASETS["dd2.MEIMHI"] == ("dMEI", "dMHI", "d2MEI", "d2MHI")
    assert len(DATASETS["_d.MEI"]) == 2
    assert DATASETS["_dd2.MEIMHI"] == ("MEI", "MHI", "dMEI", "dMHI", "d2MEI", "d2MHI")


def test_index_datasets(ds1_features):
    assert set(ds1_features) == TABLE_NAMES
    for name, feats in ds1_features.items():
        assert feats.column_names == DATASETS[name]
        assert feats.rows.shape == (100, len(DATASETS[name]))
        assert np.all((feats.rows >= 0) & (feats.rows <= 1))


@pytest.mark.parametrize("family", ["uniform_weighted", "covariance_weighted"])
def test_weighted_families(ds1, family):
    feats = build_index_datasets(fit_bspline(ds1), family, ["dd2.MEIMHI"])
    assert list(feats) == ["dd2.MEIMHI"]
    rows = feats["dd2.MEIMHI"].rows
    if family == "uniform_weighted":
        # uniform weights keep the univariate gap of 1/n between MHI and MEI
        np.testing.assert_allclose(rows[:, 1] - rows[:, 0], 1 / 100, atol=1e-12)


def test_combination_names():
    assert combination_name("dd2.MEIMHI", "kmeans-euclidean") == "kmeans.dd2.MEIMHI-euclidean"
    assert combination_name("d.MEIMHI", "spc") == "spc.d.MEIMHI"
    assert combination_name("d.MEIMHI", "complete") == "complete.d.MEIMHI-euclidean"
    assert combination_name("d.MEIMHI", "kkmeans-gaussian") == "kkmeans.d.MEIMHI-gaussian"


def test_full_grid(ds1_cells):
    assert len(ds1_cells) == 150
    names = {(c.row.dataset, c.row.method) for c in ds1_cells}
    assert names == {(d, m) for d in DATASETS for m in METHODS}
    for cell in ds1_cells:
        assert cell.row.error is None
        assert cell.row.report.elapsed_seconds == 0.0
        assert 0.0 <= cell.row.rand_index <= 1.0


def test_grid_is_deterministic(ds1, ds1_cells):
    config = PipelineConfig(timing=False, datasets=("d.MEIMHI", "_dd2.MEI"))
    again = run_sample(ds1, config)
    expected = [c.row for c in ds1_cells if c.row.dataset in config.datasets]
    assert [c.row for c in again] == expected


@pytest.mark.parametrize(
    "kwargs, word",
    [
        ({"datasets": ("dd2.MEIMH",)}, "dd2.MEIMHI"),
        ({"methods": ("kmeans",)}, "kmeans-euclidean"),
        ({"family": "joint_weighted"}, "uniform_weighted"),
    ],
)
def test_names_fail_fast(kwargs, word):
    with pytest.raises(ArgumentError, match=word):
        PipelineConfig(**kwargs)


def test_config_validation(monkeypatch):
    with pytest.raises(ArgumentError):
        PipelineConfig(k=1)
    with pytest.raises(ArgumentError):
        PipelineConfig(datasets=("d.MEIMHI", "d.MEIMHI"))
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert PipelineConfig().resolved_workers() == 3
    assert PipelineConfig(workers=2).resolved_workers() == 2
    monkeypatch.setenv(WORKERS_ENV, "zero")
    with pytest.raises(ArgumentError):
        PipelineConfig().resolved_workers()


def test_error_rows_do_not_abort():
    feats = FeatureMatrix(np.array([[0.0], [0.1], [1000.0], [1000.1]]), ("x",))
    datasets = {"d.MEIMHI": feats, "_d.MEI": DegeneracyError("no variability")}
    config = PipelineConfig(sigma=1e-3, timing=False)
    cells = run_grid(datasets, ("single", "spc"), 3, 0, [1, 1, 2, 2], config)
    assert len(cells) == 4
    by_key = {(c.row.dataset, c.row.method): c.row for c in cells}
    assert by_key[("d.MEIMHI", "single")].report is not None
    assert "DegeneracyError" in by_key[("d.MEIMHI", "spc")].error
    assert by_key[("_d.MEI", "single")].error == "DegeneracyError: no variability"


def test_constant_dimension_reports_error_rows():
    # a dimension with no variability makes the covariance weights undefined
    rng = np.random.default_rng(0)
    values = np.zeros((12, 2, 60))
    values[:, 0] = rng.standard_normal((12, 60)).cumsum(axis=1)
    sample = MultivariateFunctionalSample(values, Grid.uniform(0, 1, 60), np.repeat([1, 2], 6))
    cells = run_sample(sample, PipelineConfig(family="covariance_weighted", n_basis=10,
                                              datasets=("d.MEIMHI",), methods=("single",)))
    assert len(cells) == 1
    assert "DegeneracyError" in cells[0].row.error


def test_k_resolution(ds1):
    unlabelled = ds1.with_labels(None)
    with pytest.raises(ArgumentError, match="k is required"):
        run_sample(unlabelled, PipelineConfig(datasets=("d.MEIMHI",), methods=("single",)))
    cells = run_sample(unlabelled, PipelineConfig(k=3, datasets=("d.MEIMHI",), methods=("single", "spc")))
    names, table = partitions_table(cells)
    assert names == ["single.d.MEIMHI-euclidean", "spc.d.MEIMHI"]
    assert table.shape == (100, 2)
    assert set(table[:, 0]) == {1, 2, 3}
    assert all(c.row.report is None for c in cells)


def test_seeds():
    assert cell_seed(0, "d.MEIMHI", "spc") == cell_seed(0, "d.MEIMHI", "spc")
    assert cell_seed(0, "d.MEIMHI", "spc") != cell_seed(0, "d.MEIMHI", "kmeans-euclidean")
    assert replicate_seed(0, 1) != replicate_seed(0, 2) != replicate_seed(1, 2)


def test_single_replicate_aggregation():
    config = PipelineConfig(datasets=("d.MEIMHI", "dd2.MEIMHI"), methods=("kmeans-euclidean", "average"),
                            timing=False)
    result = bench("ds4", 1, 7, config)
    assert len(result.rows) == len(result.summary) == 4
    means = {(r.dataset, r.method): r.report for r in result.summary}
    for row in result.rows:
        assert means[(row.dataset, row.method)] == row.report
    assert all(r.replicate == 0 for r in result.summary)
    sample = gen_ds4(replicate_seed(7, 1))
    direct = run_sample(sample, config, seed=replicate_seed(7, 1))
    assert {c.row.report for c in direct} == {r.report for r in result.rows}


def test_aggregate_means_and_failures():
    rep = lambda ri: EvaluationReport(ri, ri, ri, 1.0)
    rows = [
        ResultRow("d.MEIMHI", "spc", rep(0.5), 1), ResultRow("d.MEIMHI", "spc", rep(1.0), 2),
        ResultRow("d.MEIMHI", "spc", None, 3, error="x"),
        ResultRow("_d.MEI", "spc", None, 1, error="first"), ResultRow("_d.MEI", "spc", None, 2, error="second"),
    ]
    summary = aggregate(rows, seed=4)
    assert summary[0].rand_index == 0.75
    assert summary[1].error == "first"
    assert [r.seed for r in summary] == [4, 4]


def test_bench_workers_do_not_change_results():
    config = PipelineConfig(datasets=("d.MEIMHI",), methods=("kmeans-euclidean", "spc"), timing=False)
    serial = bench("ds4", 2, 0, config)
    parallel = bench("ds4", 2, 0, PipelineConfig(datasets=("d.MEIMHI",), methods=("kmeans-euclidean", "spc"),
                                                 timing=False, workers=2))
    assert serial == parallel


def test_plot_data(tmp_path, ds1, ds1_features):
    emit_plot_data(ds1_features["d.MEIMHI"], ds1.labels, tmp_path / "p.csv")
    with open(tmp_path / "p.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["dMEI", "dMHI", "label"]
    assert len(rows) == 101
    assert {len(r) for r in rows} == {3}
    vals = np.array([[float(a), float(b)] for a, b, _ in rows[1:]])
    assert np.all((vals >= 0) & (vals <= 1))
    with pytest.raises(ArgumentError):
        emit_plot_data(FeatureMatrix.from_array(np.zeros((3, 1))), [1, 1, 2], tmp_path / "q.csv")
