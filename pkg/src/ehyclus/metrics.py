"""External validation of a partition against known classes.

Pair-based scores are computed from the contingency table: the number of
pairs placed together in both partitions is ``sum_ab C(n_ab, 2)``, and the
marginal counts give the pairs placed together in each partition alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ArgumentError, Partition


@dataclass(frozen=True)
class EvaluationReport:
    purity: float
    f_measure: float
    rand_index: float
    elapsed_seconds: float = 0.0

    def __post_init__(self):
        for name in ("purity", "f_measure", "rand_index"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ArgumentError(f"{name} must lie in [0, 1], got {value}")
        if not self.elapsed_seconds >= 0.0:
            raise ArgumentError("elapsed_seconds must be nonnegative")


def _labels(partition) -> np.ndarray:
    if isinstance(partition, Partition):
        return partition.assignment
    return np.asarray(partition).ravel()


def confusion_matrix(pred, truth) -> np.ndarray:
    """Counts with true classes as rows and predicted clusters as columns.

    Rows and columns follow the sorted distinct label values.
    """
    p, t = _labels(pred), _labels(truth)
    if p.shape != t.shape:
        raise ArgumentError(f"partitions have different lengths ({p.size} and {t.size})")
    _, t_idx = np.unique(t, return_inverse=True)
    _, p_idx = np.unique(p, return_inverse=True)
    table = np.zeros((t_idx.max(initial=-1) + 1, p_idx.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (t_idx, p_idx), 1)
    return table


def _pairs(counts) -> int:
    counts = np.asarray(counts, dtype=np.int64)
    return int(np.sum(counts * (counts - 1) // 2))


def pair_counts(pred, truth):
    """``(together_in_both, together_in_pred, together_in_truth, total_pairs)``."""
    table = confusion_matrix(pred, truth)
    n = int(table.sum())
    return (
        _pairs(table),
        _pairs(table.sum(axis=0)),
        _pairs(table.sum(axis=1)),
        n * (n - 1) // 2,
    )


def purity(pred, truth) -> float:
    table = confusion_matrix(pred, truth)
    return float(table.max(axis=0).sum() / table.sum())


def rand_index(pred, truth) -> float:
    both, in_pred, in_truth, total = pair_counts(pred, truth)
    # pairs separated in both = total - (together in either)
    agree = both + (total - in_pred - in_truth + both)
    return agree / total


def precision_recall(pred, truth):
    """Pairwise precision and recall; an empty denominator gives 0."""
    both, in_pred, in_truth, _ = pair_counts(pred, truth)
    precision = both / in_pred if in_pred else 0.0
    recall = both / in_truth if in_truth else 0.0
    return precision, recall


def f_measure(pred, truth) -> float:
    """Pairwise F1, defined as 0 when no pair is placed together in both."""
    precision, recall = precision_recall(pred, truth)
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def evaluate(pred, truth, elapsed_seconds: float = 0.0) -> EvaluationReport:
    """Purity, pairwise F-measure and Rand Index of ``pred`` against ``truth``."""
    p, t = _labels(pred), _labels(truth)
    if p.shape != t.shape:
        raise ArgumentError(f"partitions have different lengths ({p.size} and {t.size})")
    if p.size < 2:
        raise ArgumentError("evaluation needs at least two objects")
    return EvaluationReport(
        purity=purity(p, t),
        f_measure=f_measure(p, t),
        rand_index=rand_index(p, t),
        elapsed_seconds=float(elapsed_seconds),
    )
