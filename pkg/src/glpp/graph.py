"""Heat-kernel similarity graphs, degree vectors, and Laplacians.

Weights are w_ij = exp(-dist^2 / heat). The subspace graph is dense by
default; the vector graph always uses k-nearest-neighbor truncation with
OR semantics (an edge survives when either endpoint selects the other).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, ParameterError
from .grassmann import GrassmannPoint, pairwise_sq_distances

__all__ = ["AffinityGraph", "build_grassmann_graph", "build_vector_graph"]


@dataclass(frozen=True)
class AffinityGraph:
    """Symmetric similarity matrix with its degree vector and Laplacian."""

    weights: np.ndarray
    degrees: np.ndarray
    laplacian: np.ndarray

    @classmethod
    def from_weights(cls, weights: np.ndarray) -> "AffinityGraph":
        w = np.array(weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionError(f"weights must be square, got shape {w.shape}")
        degrees = w.sum(axis=1)
        laplacian = np.diag(degrees) - w
        for arr in (w, degrees, laplacian):
            arr.flags.writeable = False
        return cls(weights=w, degrees=degrees, laplacian=laplacian)

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]


def _knn_or_mask(d2: np.ndarray, knn: int) -> np.ndarray:
    """Boolean mask keeping (i, j) when j is among i's k nearest or vice versa.

    Self indices are excluded from the neighbor lists; distance ties fall to
    the lower index via a stable sort.
    """
    n = d2.shape[0]
    mask = np.zeros((n, n), dtype=bool)
    for i in range(n):
        order = np.argsort(d2[i], kind="stable")
        order = order[order != i][:knn]
        mask[i, order] = True
    return mask | mask.T


def _finish(w: np.ndarray, d2: np.ndarray, knn: int | None, self_loops: bool) -> AffinityGraph:
    n = w.shape[0]
    if knn is not None:
        if not 1 <= knn < n:
            raise ParameterError(f"need 1 <= knn < N, got knn={knn}, N={n}")
        mask = _knn_or_mask(d2, knn)
        w = np.where(mask, w, 0.0)
        w = np.maximum(w, w.T)
    np.fill_diagonal(w, 1.0 if self_loops else 0.0)
    return AffinityGraph.from_weights(w)


def build_grassmann_graph(
    points: Sequence[GrassmannPoint],
    heat: float = 1.0,
    knn: int | None = None,
    self_loops: bool = True,
) -> AffinityGraph:
    """Similarity graph over subspace points under the embedding distance.

    Dense unless ``knn`` is given. ``heat`` rescales the squared distances;
    the default of 1.0 leaves them untouched.
    """
    if len(points) < 2:
        raise ParameterError(f"need at least 2 points, got {len(points)}")
    if not heat > 0.0:
        raise ParameterError(f"heat must be positive, got {heat}")
    d2 = pairwise_sq_distances(points)
    w = np.exp(-d2 / heat)
    return _finish(w, d2, knn, self_loops)


def build_vector_graph(
    data: np.ndarray,
    heat: float,
    knn: int,
    self_loops: bool = True,
) -> AffinityGraph:
    """k-nearest-neighbor heat-kernel graph over rows of a vector dataset."""
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise DimensionError(f"data must be 2-D, got shape {x.shape}")
    n = x.shape[0]
    if n < 2:
        raise ParameterError(f"need at least 2 vectors, got {n}")
    if not heat > 0.0:
        raise ParameterError(f"heat must be positive, got {heat}")
    sq = (x * x).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    d2 = 0.5 * (d2 + d2.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    w = np.exp(-d2 / heat)
    return _finish(w, d2, knn, self_loops)
