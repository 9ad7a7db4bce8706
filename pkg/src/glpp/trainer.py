"""Learning a linear map that compresses subspace data onto a smaller manifold.

The map A (D x d) sends a subspace with basis X in G(p, D) to the Q factor
of A^T X, a point of G(p, d). Training alternates two steps until the
neighborhood-weighted disagreement of the mapped points stops changing:

  1. normalize every point against the current A, writing A^T X_i = Q_i R_i
     and keeping both Q_i and the rescaled ambient basis X_i R_i^{-1};
  2. refit A by minimizing a quadratic surrogate of the disagreement under a
     degree-weighted trace constraint, which reduces to taking the d
     smallest eigenpairs of a generalized symmetric eigenvalue problem.

The similarity graph is built once from the original points and reused for
every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    NormalizationDegenerate,
    ParameterError,
    SolverFailure,
)
from .graph import AffinityGraph, build_grassmann_graph
from .grassmann import GrassmannPoint, fix_column_signs, pairwise_sq_distances, signed_qr

__all__ = [
    "TrainerConfig",
    "ProjectionModel",
    "normalize_points",
    "projector_difference",
    "constraint_matrix",
    "surrogate_matrix",
    "solve_projection",
    "evaluate_objective",
    "fit",
    "transform",
    "select_dim",
]

# QR normalization is rejected when the triangular factor is worse conditioned
# than this; beyond it the rescaled basis X R^{-1} loses all accuracy.
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class TrainerConfig:
    """Knobs for ``fit``; the defaults suit datasets of a few hundred points.

    ``ridge`` is a relative Tikhonov shift: the constraint matrix H receives
    ridge * trace(H) / D on its diagonal before the eigensolve, keeping the
    solve well posed when H is singular (for example when N * p < D).
    """

    max_iterations: int = 50
    rel_tolerance: float = 1e-6
    heat: float = 1.0
    ridge: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ParameterError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.rel_tolerance > 0.0:
            raise ParameterError(f"rel_tolerance must be positive, got {self.rel_tolerance}")
        if not self.heat > 0.0:
            raise ParameterError(f"heat must be positive, got {self.heat}")
        if self.ridge < 0.0:
            raise ParameterError(f"ridge must be nonnegative, got {self.ridge}")


@dataclass
class ProjectionModel:
    """A trained map plus everything needed to audit the run.

    ``constraint_final`` is the H matrix used in the last eigensolve, and
    ``training_reduced`` holds the training points mapped by the final A;
    ``transform`` on a training point reproduces the matching entry.
    """

    projection: np.ndarray
    source_dims: tuple[int, int]
    target_dim: int
    n_train: int
    seed: int
    ridge: float
    iterations_run: int
    converged: bool
    objective_trace: list[float] = field(default_factory=list)
    graph: AffinityGraph | None = None
    constraint_final: np.ndarray | None = None
    training_reduced: list[GrassmannPoint] | None = None


def normalize_points(
    points: Sequence[GrassmannPoint], projection: np.ndarray
) -> list[tuple[np.ndarray, GrassmannPoint]]:
    """QR-normalize every point against the map ``projection``.

    For each X_i, factors A^T X_i = Q_i R_i and returns the pair
    (X_i R_i^{-1}, Q_i). The first element is the rescaled ambient basis
    (D x p, generally not orthonormal); the second is the mapped point on
    the reduced manifold. A^T (X_i R_i^{-1}) reproduces Q_i.

    Raises NormalizationDegenerate, naming the offending index, when a
    triangular factor is singular or has condition number beyond
    ``CONDITION_LIMIT``.
    """
    a = np.asarray(projection, dtype=float)
    out: list[tuple[np.ndarray, GrassmannPoint]] = []
    for i, x in enumerate(points):
        y = a.T @ x.basis
        q, r = signed_qr(y)
        sv = scipy.linalg.svdvals(r)
        if not np.all(np.isfinite(sv)) or sv[-1] <= 0.0 or sv[0] / sv[-1] > CONDITION_LIMIT:
            raise NormalizationDegenerate(
                f"point {i}: projected basis is numerically rank deficient "
                f"(singular values of R span [{sv[-1]:.3e}, {sv[0]:.3e}])"
            )
        rescaled = scipy.linalg.solve_triangular(r.T, x.basis.T, lower=True).T
        out.append((rescaled, GrassmannPoint(q)))
    return out


def projector_difference(xt_i: np.ndarray, xt_j: np.ndarray) -> np.ndarray:
    """Difference of the two rescaled-basis Gram projectors, a symmetric D x D matrix."""
    xi = np.asarray(xt_i, dtype=float)
    xj = np.asarray(xt_j, dtype=float)
    if xi.shape != xj.shape:
        raise ParameterError(f"shape mismatch: {xi.shape} vs {xj.shape}")
    return xi @ xi.T - xj @ xj.T


def constraint_matrix(
    normalized: Sequence[np.ndarray], degrees: np.ndarray
) -> np.ndarray:
    """Degree-weighted sum of rescaled-basis Gram matrices (symmetric PSD)."""
    degrees = np.asarray(degrees, dtype=float)
    if len(normalized) != degrees.shape[0]:
        raise ParameterError(
            f"got {len(normalized)} bases but {degrees.shape[0]} degrees"
        )
    stack = np.stack([np.asarray(m, dtype=float) for m in normalized])
    h = np.einsum("i,iab,icb->ac", degrees, stack, stack)
    return 0.5 * (h + h.T)


def surrogate_matrix(
    normalized: Sequence[np.ndarray],
    weights: np.ndarray,
    projection_prev: np.ndarray,
) -> np.ndarray:
    """Quadratic-surrogate matrix J for the disagreement objective.

    Equals sum_ij w_ij G_ij A A^T G_ij with G_ij the pairwise projector
    differences and A the previous iterate. Expanding G_ij keeps the cost at
    O(N^2 D d) instead of materializing N^2 D x D terms: with
    M_i = Xt_i (Xt_i^T A), the sum is
    2 * sum_i deg_i M_i M_i^T - (U + U^T), U = sum_ij w_ij M_i M_j^T.
    """
    w = np.asarray(weights, dtype=float)
    a = np.asarray(projection_prev, dtype=float)
    n = len(normalized)
    if w.shape != (n, n):
        raise ParameterError(f"weights must be {n} x {n}, got {w.shape}")
    stack = np.stack([np.asarray(m, dtype=float) for m in normalized])
    m = stack @ (stack.transpose(0, 2, 1) @ a)
    degrees = w.sum(axis=1)
    diag_part = np.einsum("i,iab,icb->ac", degrees, m, m)
    v = np.tensordot(w, m, axes=(1, 0))
    u = np.einsum("iab,icb->ac", m, v)
    j = 2.0 * diag_part - (u + u.T)
    return 0.5 * (j + j.T)


def solve_projection(
    quadratic: np.ndarray, constraint: np.ndarray, d: int, ridge: float
) -> np.ndarray:
    """Minimize tr(A^T J A) subject to the trace constraint on H.

    Solves the generalized symmetric problem J a = lambda (H + ridge I) a
    through a symmetric factorization of the shifted constraint matrix and
    returns the eigenvectors of the d smallest eigenvalues, ordered
    ascending, sign-fixed, and scaled so each column k satisfies
    a_k^T (H + ridge I) a_k = 1/d.
    """
    j = np.asarray(quadratic, dtype=float)
    h = np.asarray(constraint, dtype=float)
    n = j.shape[0]
    if j.shape != (n, n) or h.shape != (n, n):
        raise ParameterError(f"matrix shapes disagree: {j.shape} vs {h.shape}")
    if not 1 <= d < n:
        raise ParameterError(f"need 1 <= d < D, got d={d}, D={n}")
    shifted = h + ridge * np.eye(n)
    try:
        _, vectors = scipy.linalg.eigh(j, shifted)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError):
        smallest = float(scipy.linalg.eigvalsh(shifted)[0])
        raise SolverFailure(
            f"shifted constraint matrix is not positive definite "
            f"(smallest eigenvalue {smallest:.3e})"
        ) from None
    a = fix_column_signs(vectors[:, :d])
    return a / np.sqrt(d)


def _objective_from_reduced(
    reduced: Sequence[GrassmannPoint], weights: np.ndarray
) -> float:
    """Weighted disagreement sum_ij w_ij ||Q_i Q_i^T - Q_j Q_j^T||_F^2."""
    d2 = pairwise_sq_distances(reduced)
    return float(2.0 * np.sum(weights * d2))


def evaluate_objective(
    points: Sequence[GrassmannPoint], weights: np.ndarray, projection: np.ndarray
) -> float:
    """Disagreement objective of a candidate map over the given graph weights.

    Normalizes the points against ``projection`` and returns
    sum_ij w_ij ||A^T G_ij A||_F^2, evaluated through the reduced points.
    """
    reduced = [q for _, q in normalize_points(points, projection)]
    return _objective_from_reduced(reduced, np.asarray(weights, dtype=float))


def fit(
    points: Sequence[GrassmannPoint],
    target_dim: int,
    config: TrainerConfig | None = None,
) -> ProjectionModel:
    """Train the projection map on a set of subspace points.

    Starts from A = [I_d; seeded Gaussian block], builds the similarity
    graph once from the original points, then alternates normalization and
    the surrogate eigensolve. Stops when the true objective changes by less
    than ``rel_tolerance`` relative to its previous value, or after
    ``max_iterations`` solves. The recorded trace holds the objective at the
    initial map and after every solve.
    """
    cfg = TrainerConfig() if config is None else config
    n = len(points)
    if n < 2:
        raise ParameterError(f"need at least 2 points, got {n}")
    ambient = points[0].ambient_dim
    subspace = points[0].subspace_dim
    if not subspace <= target_dim < ambient:
        raise ParameterError(
            f"need p <= d < D, got p={subspace}, d={target_dim}, D={ambient}"
        )

    rng = np.random.default_rng(cfg.seed)
    projection = np.vstack(
        [np.eye(target_dim), rng.standard_normal((ambient - target_dim, target_dim))]
    )

    graph = build_grassmann_graph(points, heat=cfg.heat)
    weights = graph.weights
    degrees = graph.degrees

    def normalized_split(a: np.ndarray, iteration: int):
        try:
            pairs = normalize_points(points, a)
        except NormalizationDegenerate as exc:
            raise NormalizationDegenerate(f"iteration {iteration}: {exc}") from None
        return [xt for xt, _ in pairs], [q for _, q in pairs]

    rescaled, reduced = normalized_split(projection, 0)
    objective_prev = _objective_from_reduced(reduced, weights)
    trace = [objective_prev]

    converged = False
    iterations_run = 0
    h = None
    ridge_eff = cfg.ridge
    for iteration in range(1, cfg.max_iterations + 1):
        iterations_run = iteration
        h = constraint_matrix(rescaled, degrees)
        trace_h = float(np.trace(h))
        ridge_eff = cfg.ridge * (trace_h / ambient if trace_h > 0.0 else 1.0)
        quad = surrogate_matrix(rescaled, weights, projection)
        try:
            projection = solve_projection(quad, h, target_dim, ridge_eff)
        except SolverFailure as exc:
            raise SolverFailure(f"iteration {iteration}: {exc}") from None
        rescaled, reduced = normalized_split(projection, iteration)
        objective = _objective_from_reduced(reduced, weights)
        trace.append(objective)
        if abs(objective - objective_prev) <= cfg.rel_tolerance * max(
            1.0, abs(objective_prev)
        ):
            converged = True
            objective_prev = objective
            break
        objective_prev = objective

    if np.linalg.matrix_rank(projection) < target_dim:
        raise SolverFailure("final projection matrix lost column rank")

    return ProjectionModel(
        projection=projection,
        source_dims=(ambient, subspace),
        target_dim=target_dim,
        n_train=n,
        seed=cfg.seed,
        ridge=ridge_eff,
        iterations_run=iterations_run,
        converged=converged,
        objective_trace=trace,
        graph=graph,
        constraint_final=h,
        training_reduced=reduced,
    )


def transform(model: ProjectionModel, x: GrassmannPoint) -> GrassmannPoint:
    """Map one subspace point through a trained model onto the reduced manifold."""
    ambient = model.source_dims[0]
    if x.ambient_dim != ambient:
        raise DimensionError(
            f"point ambient dimension {x.ambient_dim} does not match "
            f"model dimension {ambient}"
        )
    y = model.projection.T @ x.basis
    q, r = signed_qr(y)
    sv = scipy.linalg.svdvals(r)
    if not np.all(np.isfinite(sv)) or sv[-1] <= 0.0 or sv[0] / sv[-1] > CONDITION_LIMIT:
        raise NormalizationDegenerate(
            f"projected basis is numerically rank deficient "
            f"(singular values of R span [{sv[-1]:.3e}, {sv[0]:.3e}])"
        )
    return GrassmannPoint(q)


def select_dim(points: Sequence[GrassmannPoint], energy_rate: float) -> int:
    """Smallest reduced dimension capturing the requested spectral energy.

    Sums the projectors of all points, takes the eigenvalues in descending
    order, and returns the shortest prefix whose mass reaches
    ``energy_rate`` times the total (which always equals N * p). The result
    is clamped to at least the subspace dimension.
    """
    if not 0.0 < energy_rate < 1.0:
        raise ParameterError(f"energy_rate must lie in (0, 1), got {energy_rate}")
    if len(points) == 0:
        raise ParameterError("need at least one point")
    ambient = points[0].ambient_dim
    subspace = points[0].subspace_dim
    total_projector = np.zeros((ambient, ambient))
    for pt in points:
        if pt.ambient_dim != ambient:
            raise ParameterError("points share no common ambient dimension")
        total_projector += pt.basis @ pt.basis.T
    evals = np.linalg.eigvalsh(total_projector)[::-1]
    np.maximum(evals, 0.0, out=evals)
    cumulative = np.cumsum(evals)
    reached = cumulative >= energy_rate * evals.sum()
    chosen = int(np.argmax(reached)) + 1 if reached.any() else ambient
    return max(chosen, subspace)
