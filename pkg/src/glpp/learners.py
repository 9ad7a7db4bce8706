"""Evaluation learners: vector LPP, subspace kNN, and subspace k-means.

All distance computations on subspace data use the projector-embedding
metric, so every learner here is invariant to the choice of basis
representative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, LengthMismatch, ParameterError, ValidationError
from .graph import AffinityGraph
from .grassmann import (
    GrassmannPoint,
    cross_sq_distances,
    fix_column_signs,
    pairwise_sq_distances,
)
from .trainer import solve_projection

__all__ = [
    "LabeledDataset",
    "ClusterAssignment",
    "lpp_fit_vectors",
    "gknn_classify",
    "gkm_cluster",
]


@dataclass
class LabeledDataset:
    """Subspace points paired with integer class labels."""

    points: list[GrassmannPoint]
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=int)
        if self.labels.ndim != 1 or len(self.points) != self.labels.shape[0]:
            raise LengthMismatch(
                f"{len(self.points)} points but {self.labels.shape} labels"
            )
        if len(self.points) < 1:
            raise ValidationError("dataset is empty")
        if self.labels.size and self.labels.min() < 0:
            raise ValidationError("labels must be nonnegative integers")

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class ClusterAssignment:
    """Result of a k-means run: memberships, centroids, and the cost trace."""

    assignments: np.ndarray
    centroids: list[GrassmannPoint]
    inertia: float
    iterations: int
    inertia_trace: list[float] = field(default_factory=list)


def lpp_fit_vectors(
    data: np.ndarray,
    d: int,
    graph: AffinityGraph,
    ridge: float | None = None,
) -> np.ndarray:
    """Classic locality-preserving projection for vector rows.

    Minimizes the graph-Laplacian quadratic form of the projected data under
    the degree-weighted covariance constraint, returning the d eigenvectors
    of the smallest generalized eigenvalues with the same ridge, sign, and
    ordering conventions as ``solve_projection``. When ``ridge`` is None it
    defaults to 1e-8 * trace(X D X^T) / D.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise DimensionError(f"data must be 2-D, got shape {x.shape}")
    n, dim = x.shape
    if graph.n_nodes != n:
        raise DimensionError(f"graph has {graph.n_nodes} nodes for {n} vectors")
    if not 1 <= d < dim:
        raise ParameterError(f"need 1 <= d < D, got d={d}, D={dim}")
    xt = x.T
    lap_form = xt @ graph.laplacian @ x
    deg_form = (xt * graph.degrees) @ x
    lap_form = 0.5 * (lap_form + lap_form.T)
    deg_form = 0.5 * (deg_form + deg_form.T)
    if ridge is None:
        ridge = 1e-8 * float(np.trace(deg_form)) / dim
    return solve_projection(lap_form, deg_form, d, ridge)


def gknn_classify(train: LabeledDataset, query: GrassmannPoint, k: int) -> int:
    """Majority label among the k nearest training points to the query.

    Distance ties fall to the lower training index. Vote ties go to the
    candidate label whose nearest member sits closest to the query, with
    the smaller label winning an exact tie.
    """
    n = len(train)
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= {n}, got k={k}")
    dist = cross_sq_distances(train.points, [query])[:, 0]
    order = np.argsort(dist, kind="stable")[:k]
    votes = train.labels[order]
    d_near = dist[order]
    counts = np.bincount(votes)
    best = counts.max()
    candidates = np.flatnonzero(counts == best)
    if candidates.size == 1:
        return int(candidates[0])
    return int(min((float(d_near[votes == c].min()), int(c)) for c in candidates)[1])


def _extrinsic_mean(members: Sequence[GrassmannPoint]) -> GrassmannPoint:
    """Subspace whose projector is Frobenius-closest to the member average.

    The minimizer over rank-p projectors is spanned by the top-p
    eigenvectors of the averaged projector.
    """
    ambient = members[0].ambient_dim
    subspace = members[0].subspace_dim
    mean_proj = np.zeros((ambient, ambient))
    for pt in members:
        mean_proj += pt.basis @ pt.basis.T
    mean_proj /= len(members)
    _, vectors = np.linalg.eigh(mean_proj)
    top = vectors[:, ::-1][:, :subspace]
    return GrassmannPoint(fix_column_signs(top))


def _seed_centroids(d2: np.ndarray, k: int, rng: np.random.Generator) -> list[int]:
    """k-means++ style seeding over a precomputed squared-distance matrix."""
    n = d2.shape[0]
    chosen = [int(rng.integers(n))]
    closest = d2[chosen[0]].copy()
    for _ in range(k - 1):
        total = closest.sum()
        if total > 0.0 and np.isfinite(total):
            nxt = int(rng.choice(n, p=closest / total))
        else:
            # all remaining mass is zero (duplicate-heavy data): take the
            # lowest unchosen index so seeding stays deterministic
            taken = set(chosen)
            nxt = next(i for i in range(n) if i not in taken)
        chosen.append(nxt)
        np.minimum(closest, d2[nxt], out=closest)
    return chosen


def gkm_cluster(
    points: Sequence[GrassmannPoint],
    n_clusters: int,
    seed: int,
    max_iter: int = 100,
) -> ClusterAssignment:
    """Lloyd-style k-means on subspace points under the embedding distance.

    Centroids are extrinsic means; an empty cluster is reseeded from the
    point currently farthest from its own centroid. Stops when assignments
    repeat or after ``max_iter`` update rounds. Fixed seeds give bitwise
    reproducible output.
    """
    points = list(points)
    n = len(points)
    if not 2 <= n_clusters <= n:
        raise ParameterError(f"need 2 <= K <= {n}, got K={n_clusters}")
    if max_iter < 1:
        raise ParameterError(f"max_iter must be >= 1, got {max_iter}")

    rng = np.random.default_rng(seed)
    d2 = pairwise_sq_distances(points)
    centroids = [GrassmannPoint(points[i].basis) for i in _seed_centroids(d2, n_clusters, rng)]

    cross = cross_sq_distances(points, centroids)
    assignments = cross.argmin(axis=1)
    assigned_dist = cross[np.arange(n), assignments]
    trace = [float(assigned_dist.sum())]

    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        empties = []
        for c in range(n_clusters):
            members = [points[i] for i in np.flatnonzero(assignments == c)]
            if members:
                centroids[c] = _extrinsic_mean(members)
            else:
                empties.append(c)
        if empties:
            cross = cross_sq_distances(points, centroids)
            current = cross[np.arange(n), assignments]
            order = np.argsort(-current, kind="stable")
            used: set[int] = set()
            for c in empties:
                far = next(int(i) for i in order if int(i) not in used)
                used.add(far)
                centroids[c] = GrassmannPoint(points[far].basis)

        cross = cross_sq_distances(points, centroids)
        new_assignments = cross.argmin(axis=1)
        assigned_dist = cross[np.arange(n), new_assignments]
        trace.append(float(assigned_dist.sum()))
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments

    return ClusterAssignment(
        assignments=assignments.astype(int),
        centroids=centroids,
        inertia=trace[-1],
        iterations=iterations,
        inertia_trace=trace,
    )
