"""The EHyClus workflow: smooth, differentiate, index, cluster and score.

A sample is fitted with cubic B-splines. The modified epigraph and hypograph
indexes are computed on the fitted curves and on their first two
derivatives, and combined into 15 small feature matrices. Each one is then
clustered by 10 methods, giving 150 partitions per sample.

Dataset names follow ``<levels>.<indexes>``: ``_`` is the curves, ``d`` the
first and ``d2`` the second derivatives, so ``_dd2.MEI`` holds the MEI of
all three levels.
"""

from __future__ import annotations

import csv
import logging
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .clustering import FeatureMatrix, hierarchical, kernel_kmeans, kmeans, pairwise_distances, spectral
from .core import ArgumentError, EHyClusError, MultivariateFunctionalSample, Partition
from .indexes import covariance_mei_mhi, mei_mhi, uniform_mei_mhi
from .io import ResultRow, sort_rows
from .metrics import EvaluationReport, evaluate
from .simulate import DATASET_IDS, generate
from .smoothing import DEFAULT_N_BASIS, SmoothedSample, eval_derivative, fit_bspline

log = logging.getLogger(__name__)

_LEVEL_PREFIX = {0: "", 1: "d", 2: "d2"}
_LEVEL_GROUPS = {
    "_": (0,), "d": (1,), "d2": (2,), "_d": (0, 1), "_d2": (0, 2),
    "dd2": (1, 2), "_dd2": (0, 1, 2),
}


def _columns(levels: Tuple[int, ...], kinds: Tuple[str, ...]) -> Tuple[str, ...]:
    if kinds == ("MEI", "MHI"):
        return tuple(_LEVEL_PREFIX[lv] + kind for lv in levels for kind in kinds)
    return tuple(_LEVEL_PREFIX[lv] + kinds[0] for lv in levels)


def _catalog() -> Dict[str, Tuple[str, ...]]:
    out = {}
    for group in ("_", "d", "d2", "_d", "_d2", "dd2", "_dd2"):
        out[f"{group}.MEIMHI"] = _columns(_LEVEL_GROUPS[group], ("MEI", "MHI"))
    for kind in ("MEI", "MHI"):
        for group in ("_d", "_d2", "dd2", "_dd2"):
            out[f"{group}.{kind}"] = _columns(_LEVEL_GROUPS[group], (kind,))
    return out


DATASETS: Dict[str, Tuple[str, ...]] = _catalog()
"""Closed catalog of index datasets and their feature columns, in catalog order."""

METHODS = (
    "single", "complete", "average", "centroid", "ward.D2",
    "kmeans-euclidean", "kmeans-mahalanobis",
    "kkmeans-gaussian", "kkmeans-polynomial", "spc",
)
FAMILIES = ("joint", "uniform_weighted", "covariance_weighted")
_FAMILY_FUNCS = {
    "joint": mei_mhi,
    "uniform_weighted": uniform_mei_mhi,
    "covariance_weighted": covariance_mei_mhi,
}
WORKERS_ENV = "EHYCLUS_WORKERS"


def _validate_names(names, vocabulary, what) -> Tuple[str, ...]:
    names = tuple(names)
    bad = [n for n in names if n not in vocabulary]
    if bad:
        raise ArgumentError(f"unknown {what} {bad}; valid names are: {', '.join(vocabulary)}")
    if len(set(names)) != len(names):
        raise ArgumentError(f"duplicate {what} in {list(names)}")
    if not names:
        raise ArgumentError(f"no {what} selected")
    return names


@dataclass(frozen=True)
class PipelineConfig:
    """Settings for a pipeline run.

    ``k=None`` uses the number of distinct ground-truth labels. With
    ``timing=False`` every reported time is 0, which makes result files
    byte-identical across runs. ``sigma=None`` lets the Gaussian kernel and
    spectral clustering choose their width from the data.
    """

    n_basis: int = DEFAULT_N_BASIS
    k: Optional[int] = None
    family: str = "joint"
    datasets: Tuple[str, ...] = tuple(DATASETS)
    methods: Tuple[str, ...] = METHODS
    seed: int = 0
    replicates: int = 1
    restarts: int = 10
    sigma: Optional[float] = None
    degree: int = 1
    scale: float = 1.0
    offset: float = 1.0
    timing: bool = True
    workers: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "datasets", _validate_names(self.datasets, tuple(DATASETS), "datasets"))
        object.__setattr__(self, "methods", _validate_names(self.methods, METHODS, "methods"))
        if self.family not in FAMILIES:
            raise ArgumentError(f"unknown index family {self.family!r}; valid names are: {', '.join(FAMILIES)}")
        if self.n_basis < 4:
            raise ArgumentError("n_basis must be at least 4 for cubic splines")
        if self.k is not None and self.k < 2:
            raise ArgumentError(f"k must be at least 2, got {self.k}")
        if self.replicates < 1:
            raise ArgumentError("replicates must be at least 1")
        if self.restarts < 1:
            raise ArgumentError("restarts must be at least 1")
        if self.seed < 0:
            raise ArgumentError("seed must be nonnegative")
        if self.sigma is not None and not self.sigma > 0:
            raise ArgumentError("sigma must be positive")
        if self.workers is not None and self.workers < 1:
            raise ArgumentError("workers must be at least 1")

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return self.workers
        env = os.environ.get(WORKERS_ENV)
        if not env:
            return 1
        try:
            value = int(env)
        except ValueError:
            raise ArgumentError(f"{WORKERS_ENV} must be a positive integer, got {env!r}") from None
        if value < 1:
            raise ArgumentError(f"{WORKERS_ENV} must be a positive integer, got {env!r}")
        return value


def combination_name(dataset: str, method: str) -> str:
    """Full name of a dataset/method pair, e.g. ``kmeans.dd2.MEIMHI-euclidean``."""
    if "-" in method:
        algo, variant = method.split("-", 1)
        return f"{algo}.{dataset}-{variant}"
    if method == "spc":
        return f"spc.{dataset}"
    return f"{method}.{dataset}-euclidean"


def index_levels(smoothed: SmoothedSample, family: str = "joint", levels=(0, 1, 2)) -> Dict[int, object]:
    """``{level: (MEI, MHI)}`` for each derivative level.

    A level whose indexes cannot be computed maps to the raised exception
    instead, so that callers can report it per cell.
    """
    if family not in FAMILIES:
        raise ArgumentError(f"unknown index family {family!r}; valid names are: {', '.join(FAMILIES)}")
    func = _FAMILY_FUNCS[family]
    out = {}
    for lv in levels:
        try:
            mei, mhi = func(eval_derivative(smoothed, lv))
            out[lv] = (np.asarray(mei.values), np.asarray(mhi.values))
        except EHyClusError as exc:
            out[lv] = exc
    return out


def _assemble(levels: Mapping[int, object], names: Sequence[str]) -> Dict[str, object]:
    columns = {}
    for lv, value in levels.items():
        if isinstance(value, Exception):
            continue
        columns[_LEVEL_PREFIX[lv] + "MEI"], columns[_LEVEL_PREFIX[lv] + "MHI"] = value
    out = {}
    for name in names:
        needed = DATASETS[name]
        missing = [c for c in needed if c not in columns]
        if missing:
            failed = [levels[l] for l in levels if isinstance(levels[l], Exception)]
            out[name] = failed[0] if failed else ArgumentError(f"missing columns {missing}")
            continue
        out[name] = FeatureMatrix(np.column_stack([columns[c] for c in needed]), needed)
    return out


def build_index_datasets(smoothed: SmoothedSample, family: str = "joint",
                         datasets: Sequence[str] = None) -> Dict[str, FeatureMatrix]:
    """The named index feature matrices (all 15 by default) for a smoothed sample."""
    names = _validate_names(datasets if datasets is not None else tuple(DATASETS), tuple(DATASETS), "datasets")
    out = _assemble(index_levels(smoothed, family), names)
    for value in out.values():
        if isinstance(value, Exception):
            raise value
    return out


def cell_seed(seed: int, dataset: str, method: str) -> int:
    """Seed for one grid cell, derived from the run seed and the cell's name."""
    key = zlib.crc32(f"{dataset}|{method}".encode())
    return int(np.random.SeedSequence([int(seed), key]).generate_state(1)[0])


def cluster(features, method: str, k: int, seed: int = 0, config: PipelineConfig = None) -> Partition:
    """Partition the rows of ``features`` with one catalog method."""
    config = config or PipelineConfig()
    if method not in METHODS:
        raise ArgumentError(f"unknown method {method!r}; valid names are: {', '.join(METHODS)}")
    if method in ("single", "complete", "average", "centroid", "ward.D2"):
        return hierarchical(pairwise_distances(features), method, k)
    if method.startswith("kmeans-"):
        return kmeans(features, k, method.split("-", 1)[1], seed=seed, restarts=config.restarts)
    if method.startswith("kkmeans-"):
        return kernel_kmeans(
            features, k, method.split("-", 1)[1], seed=seed, restarts=config.restarts,
            sigma=config.sigma, degree=config.degree, scale=config.scale, offset=config.offset,
        )
    return spectral(features, k, sigma=config.sigma, seed=seed, restarts=config.restarts)


@dataclass(frozen=True)
class CellResult:
    row: ResultRow
    partition: Optional[Partition] = field(default=None, compare=False)


def run_grid(datasets: Mapping[str, object], methods: Sequence[str] = METHODS, k: int = 2,
             seed: int = 0, truth=None, config: PipelineConfig = None,
             replicate: int = 1) -> List[CellResult]:
    """Cluster every dataset with every method.

    ``datasets`` maps names to feature matrices (or to an exception, which is
    then reported for each of its cells). Failures never stop the grid: the
    cell is recorded with ``report=None`` and the error message. Without
    ``truth`` only partitions are returned.
    """
    config = config or PipelineConfig()
    methods = _validate_names(methods, METHODS, "methods")
    out = []
    for name, features in datasets.items():
        for method in methods:
            if isinstance(features, Exception):
                out.append(CellResult(ResultRow(name, method, None, replicate, seed, _describe(features))))
                continue
            start = time.perf_counter()
            try:
                part = cluster(features, method, k, cell_seed(seed, name, method), config)
            except (EHyClusError, np.linalg.LinAlgError) as exc:
                log.warning("%s failed: %s", combination_name(name, method), exc)
                out.append(CellResult(ResultRow(name, method, None, replicate, seed, _describe(exc))))
                continue
            elapsed = time.perf_counter() - start if config.timing else 0.0
            report = evaluate(part, truth, elapsed) if truth is not None else None
            out.append(CellResult(ResultRow(name, method, report, replicate, seed), part))
    return out


def _describe(exc: BaseException) -> str:
    return f"{type(exc).__name__}: {exc}"


def _resolve_k(sample: MultivariateFunctionalSample, config: PipelineConfig) -> int:
    if config.k is not None:
        return config.k
    if sample.labels is None:
        raise ArgumentError("k is required when the sample has no labels")
    return int(np.unique(sample.labels).size)


def run_sample(sample: MultivariateFunctionalSample, config: PipelineConfig = None,
               replicate: int = 1, seed: Optional[int] = None) -> List[CellResult]:
    """Full pipeline on one sample: smoothing, indexes and the method grid."""
    config = config or PipelineConfig()
    seed = config.seed if seed is None else seed
    k = _resolve_k(sample, config)
    smoothed = fit_bspline(sample, config.n_basis)
    needed = sorted({lv for name in config.datasets for lv in _LEVEL_GROUPS[name.split(".")[0]]})
    datasets = _assemble(index_levels(smoothed, config.family, needed), config.datasets)
    return run_grid(datasets, config.methods, k, seed, sample.labels, config, replicate)


def replicate_seed(seed: int, replicate: int) -> int:
    """Seed of one bench replicate (1-based), derived from the base seed."""
    return int(np.random.SeedSequence([int(seed), int(replicate)]).generate_state(1)[0])


def _bench_replicate(args) -> List[ResultRow]:
    dataset_id, replicate, config = args
    rseed = replicate_seed(config.seed, replicate)
    sample = generate(dataset_id, rseed)
    return [cell.row for cell in run_sample(sample, config, replicate, rseed)]


def aggregate(rows: Sequence[ResultRow], seed: int = 0) -> List[ResultRow]:
    """Mean Purity, F-measure, Rand Index and time per dataset/method pair.

    Failed replicates are left out of the mean; a pair that failed in every
    replicate keeps the first error. The output is sorted like result files
    (``replicate`` is 0 to mark a mean).
    """
    groups: Dict[Tuple[str, str], List[ResultRow]] = {}
    for row in rows:
        groups.setdefault((row.dataset, row.method), []).append(row)
    out = []
    for (name, method), members in groups.items():
        ok = [r.report for r in members if r.report is not None]
        if not ok:
            out.append(ResultRow(name, method, None, 0, seed, members[0].error))
            continue
        report = EvaluationReport(
            purity=float(np.mean([r.purity for r in ok])),
            f_measure=float(np.mean([r.f_measure for r in ok])),
            rand_index=float(np.mean([r.rand_index for r in ok])),
            elapsed_seconds=float(np.mean([r.elapsed_seconds for r in ok])),
        )
        out.append(ResultRow(name, method, report, 0, seed))
    return sort_rows(out)


@dataclass(frozen=True)
class BenchResult:
    rows: List[ResultRow]
    summary: List[ResultRow]

    def top(self, n: int = 5) -> List[ResultRow]:
        return self.summary[:n]


def bench(dataset_id: str, replicates: int = 1, seed: int = 0,
          config: PipelineConfig = None) -> BenchResult:
    """Regenerate a simulated dataset per replicate, run the grid and average.

    Replicates run in separate processes when more than one worker is
    configured (``workers`` or the ``EHYCLUS_WORKERS`` environment variable);
    results do not depend on the number of workers.
    """
    if dataset_id not in DATASET_IDS:
        raise ArgumentError(f"unknown dataset {dataset_id!r}; valid names are: {', '.join(DATASET_IDS)}")
    config = replace(config or PipelineConfig(), seed=seed, replicates=replicates)
    jobs = [(dataset_id, r, config) for r in range(1, replicates + 1)]
    workers = min(config.resolved_workers(), replicates)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_rep = list(pool.map(_bench_replicate, jobs))
    else:
        per_rep = [_bench_replicate(job) for job in jobs]
    rows = [row for rep in per_rep for row in rep]
    return BenchResult(rows, aggregate(rows, seed))


def emit_plot_data(features: FeatureMatrix, labels, path) -> None:
    """Write the first two feature columns and the labels for a scatter plot."""
    if not isinstance(features, FeatureMatrix):
        features = FeatureMatrix.from_array(features)
    if features.q < 2:
        raise ArgumentError("plot data needs at least two feature columns")
    labels = np.asarray(labels).ravel()
    if labels.size != features.n:
        raise ArgumentError(f"{labels.size} labels for {features.n} rows")
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([*features.column_names[:2], "label"])
            for row, lab in zip(features.rows[:, :2], labels):
                writer.writerow([repr(float(row[0])), repr(float(row[1])), int(lab)])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def partitions_table(cells: Sequence[CellResult]) -> Tuple[List[str], np.ndarray]:
    """Combination names and an ``n x cells`` matrix of cluster ids (0 for failures)."""
    names, cols = [], []
    n = next((c.partition.n for c in cells if c.partition is not None), 0)
    for cell in cells:
        names.append(combination_name(cell.row.dataset, cell.row.method))
        cols.append(cell.partition.assignment if cell.partition is not None else np.zeros(n, dtype=int))
    return names, np.column_stack(cols) if cols else np.zeros((0, 0), dtype=int)
