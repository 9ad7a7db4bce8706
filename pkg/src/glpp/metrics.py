"""Scores for classification, clustering, and embedding quality."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import LengthMismatch, ParameterError, ValidationError
from .grassmann import GrassmannPoint, pairwise_sq_distances

__all__ = [
    "EvalReport",
    "accuracy",
    "clustering_accuracy",
    "nmi",
    "knn_preservation",
]

TASKS = ("classification", "clustering", "embedding")


@dataclass(frozen=True)
class EvalReport:
    """Scores for one evaluation run; all values lie in [0, 1]."""

    task: str
    n_samples: int
    acc: float | None = None
    nmi: float | None = None
    knn_preservation: float | None = None

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValidationError(f"unknown task {self.task!r}, expected one of {TASKS}")
        if self.n_samples < 1:
            raise ValidationError(f"n_samples must be >= 1, got {self.n_samples}")
        for name in ("acc", "nmi", "knn_preservation"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name}={value} outside [0, 1]")

    def to_line(self) -> str:
        """Single-line key=value record, omitting unset scores."""
        parts = [f"task={self.task}", f"n_samples={self.n_samples}"]
        for name in ("acc", "nmi", "knn_preservation"):
            value = getattr(self, name)
            if value is not None:
                parts.append(f"{name}={value:.17g}")
        return " ".join(parts)


def _as_label_arrays(predicted, truth) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(predicted, dtype=int)
    t = np.asarray(truth, dtype=int)
    if p.ndim != 1 or t.ndim != 1 or p.shape != t.shape:
        raise LengthMismatch(f"label shapes disagree: {p.shape} vs {t.shape}")
    if p.size < 1:
        raise LengthMismatch("need at least one label")
    return p, t


def accuracy(predicted, truth) -> float:
    """Fraction of positions where the two label vectors agree."""
    p, t = _as_label_arrays(predicted, truth)
    return float(np.mean(p == t))


def clustering_accuracy(predicted, truth) -> float:
    """Best accuracy over one-to-one matchings of cluster ids to labels.

    Builds the confusion matrix and solves the optimal assignment on it, so
    the score is invariant to relabeling either argument.
    """
    p, t = _as_label_arrays(predicted, truth)
    size = int(max(p.max(), t.max())) + 1
    confusion = np.zeros((size, size))
    np.add.at(confusion, (p, t), 1.0)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    return float(confusion[rows, cols].sum() / p.size)


def _entropy(counts: np.ndarray, n: int) -> float:
    probs = counts[counts > 0] / n
    return float(-(probs * np.log(probs)).sum())


def nmi(predicted, truth) -> float:
    """Normalized mutual information, 2 I / (H(P) + H(T)) with natural logs.

    Symmetric in its arguments. Two single-cluster partitions give 1 by
    convention; otherwise a zero denominator cannot occur.
    """
    p, t = _as_label_arrays(predicted, truth)
    n = p.size
    _, p_ids = np.unique(p, return_inverse=True)
    _, t_ids = np.unique(t, return_inverse=True)
    contingency = np.zeros((p_ids.max() + 1, t_ids.max() + 1))
    np.add.at(contingency, (p_ids, t_ids), 1.0)
    row = contingency.sum(axis=1)
    col = contingency.sum(axis=0)
    h_p = _entropy(row, n)
    h_t = _entropy(col, n)
    if h_p == 0.0 and h_t == 0.0:
        return 1.0
    nz = contingency > 0
    joint = contingency[nz] / n
    outer = np.outer(row, col)[nz] / (n * n)
    info = float((joint * np.log(joint / outer)).sum())
    return float(np.clip(2.0 * info / (h_p + h_t), 0.0, 1.0))


def _knn_sets(points: Sequence[GrassmannPoint], k: int) -> list[set[int]]:
    d2 = pairwise_sq_distances(points)
    sets = []
    for i in range(len(points)):
        order = np.argsort(d2[i], kind="stable")
        order = order[order != i][:k]
        sets.append(set(int(j) for j in order))
    return sets


def knn_preservation(
    original: Sequence[GrassmannPoint],
    reduced: Sequence[GrassmannPoint],
    k: int,
) -> float:
    """Mean overlap fraction of k-nearest-neighbor sets before and after a map.

    Neighborhoods use the embedding distance with index tie-breaking; 1.0
    means every point kept exactly its original neighbors.
    """
    if len(original) != len(reduced):
        raise LengthMismatch(
            f"{len(original)} original points vs {len(reduced)} reduced"
        )
    n = len(original)
    if n < 1:
        raise LengthMismatch("need at least one point")
    if not 1 <= k < n:
        raise ParameterError(f"need 1 <= k < N, got k={k}, N={n}")
    before = _knn_sets(original, k)
    after = _knn_sets(reduced, k)
    overlaps = [len(b & a) / k for b, a in zip(before, after)]
    return float(np.mean(overlaps))
