"""Points on the Grassmann manifold and the projector-embedding metric.

A subspace is stored as a D x p matrix with orthonormal columns. Two bases
related by a right p x p orthogonal factor describe the same subspace, so all
comparisons go through the embedding X -> X X^T into symmetric matrices,
which is representative-free.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionError, RankDeficient, ValidationError

__all__ = [
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "GrassmannPoint",
    "fix_column_signs",
    "signed_qr",
    "from_raw_matrix",
    "to_projector",
    "embedding_distance_sq",
    "reorthonormalize",
    "pairwise_sq_distances",
    "cross_sq_distances",
]

_ENV_PREFIX = "GLPP_TOL_"


@dataclass(frozen=True)
class Tolerances:
    """Central numerical thresholds; pass a modified instance to override."""

    orthonormality: float = 1e-10
    rank_cutoff: float = 1e-12

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "Tolerances":
        """Build from GLPP_TOL_ORTHONORMALITY / GLPP_TOL_RANK_CUTOFF overrides."""
        source: Mapping[str, str] = os.environ if env is None else env
        values = {}
        for name in ("orthonormality", "rank_cutoff"):
            raw = source.get(_ENV_PREFIX + name.upper())
            if raw is not None:
                values[name] = float(raw)
        return cls(**values)


DEFAULT_TOLERANCES = Tolerances()


def fix_column_signs(m: np.ndarray) -> np.ndarray:
    """Flip signs so each column's largest-magnitude entry is positive.

    Ties are resolved toward the lowest row index, making the convention
    deterministic across platforms and run orders.
    """
    m = np.asarray(m, dtype=float)
    lead = np.argmax(np.abs(m), axis=0)
    signs = np.sign(m[lead, np.arange(m.shape[1])])
    signs[signs == 0.0] = 1.0
    return m * signs


def signed_qr(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Economy QR with the deterministic column-sign convention applied to Q.

    Flipping a column of Q flips the matching row of R, so q @ r still
    reconstructs the input.
    """
    q, r = np.linalg.qr(np.asarray(m, dtype=float))
    lead = np.argmax(np.abs(q), axis=0)
    signs = np.sign(q[lead, np.arange(q.shape[1])])
    signs[signs == 0.0] = 1.0
    return q * signs, r * signs[:, None]


class GrassmannPoint:
    """A p-dimensional subspace of R^D held as a read-only orthonormal basis."""

    __slots__ = ("basis",)

    def __init__(self, basis: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES):
        arr = np.array(basis, dtype=float, order="C")
        if arr.ndim != 2:
            raise DimensionError(f"basis must be 2-D, got shape {arr.shape}")
        ambient, subspace = arr.shape
        if not 1 <= subspace <= ambient:
            raise DimensionError(f"need 1 <= p <= D, got D={ambient}, p={subspace}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("basis contains non-finite entries")
        defect = np.max(np.abs(arr.T @ arr - np.eye(subspace)))
        if defect > tol.orthonormality:
            raise ValidationError(
                f"basis is not column-orthonormal (max deviation {defect:.3e})"
            )
        arr.flags.writeable = False
        self.basis = arr

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def subspace_dim(self) -> int:
        return self.basis.shape[1]

    def __repr__(self) -> str:
        return f"GrassmannPoint(D={self.ambient_dim}, p={self.subspace_dim})"


def from_raw_matrix(
    data: np.ndarray, p: int, tol: Tolerances = DEFAULT_TOLERANCES
) -> GrassmannPoint:
    """Dominant p-dimensional column subspace of a raw D x m data matrix.

    The basis consists of the p leading left singular vectors under the
    deterministic sign convention, so repeated runs produce identical output.

    Raises RankDeficient when the p-th singular value is negligible relative
    to the first, and DimensionError when fewer than p columns are supplied.
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2:
        raise DimensionError(f"data must be 2-D, got shape {arr.shape}")
    ambient, m = arr.shape
    if p < 1:
        raise DimensionError(f"need p >= 1, got p={p}")
    if m < p:
        raise DimensionError(f"need at least p={p} columns, got {m}")
    if p > ambient:
        raise DimensionError(f"need p <= D, got p={p}, D={ambient}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("data contains non-finite entries")
    u, s, _ = np.linalg.svd(arr, full_matrices=False)
    if s[0] <= 0.0 or s[p - 1] / s[0] < tol.rank_cutoff:
        ratio = 0.0 if s[0] <= 0.0 else s[p - 1] / s[0]
        raise RankDeficient(
            f"data is rank deficient for p={p} (singular value ratio {ratio:.3e})"
        )
    return GrassmannPoint(fix_column_signs(u[:, :p]), tol=tol)


def to_projector(x: GrassmannPoint) -> np.ndarray:
    """Orthogonal projector X X^T onto the subspace.

    Symmetric and idempotent with trace equal to the subspace dimension.
    """
    return x.basis @ x.basis.T


def embedding_distance_sq(x: GrassmannPoint, y: GrassmannPoint) -> float:
    """Squared distance between subspaces through the projector embedding.

    Returns half the squared Frobenius norm of the projector difference.
    Zero exactly when the two points span the same subspace; bounded above
    by p for points of equal subspace dimension.
    """
    if x.ambient_dim != y.ambient_dim:
        raise DimensionError(
            f"ambient dimensions differ: {x.ambient_dim} vs {y.ambient_dim}"
        )
    if x.subspace_dim != y.subspace_dim:
        raise DimensionError(
            f"subspace dimensions differ: {x.subspace_dim} vs {y.subspace_dim}"
        )
    diff = to_projector(x) - to_projector(y)
    return 0.5 * float(np.sum(diff * diff))


def reorthonormalize(
    m: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES
) -> GrassmannPoint:
    """Orthonormal basis spanning the same column space as ``m``.

    Uses economy QR with the deterministic sign convention. Raises
    RankDeficient when a diagonal entry of the triangular factor is
    negligible relative to the largest one.
    """
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2:
        raise DimensionError(f"input must be 2-D, got shape {arr.shape}")
    if arr.shape[1] > arr.shape[0]:
        raise DimensionError(f"need p <= D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("input contains non-finite entries")
    q, r = signed_qr(arr)
    diag = np.abs(np.diag(r))
    if diag.max() <= 0.0 or diag.min() < tol.rank_cutoff * diag.max():
        raise RankDeficient(
            f"column space is rank deficient (triangular diagonal range "
            f"[{diag.min():.3e}, {diag.max():.3e}])"
        )
    return GrassmannPoint(q, tol=tol)


def _stack_homogeneous(points: Sequence[GrassmannPoint]) -> tuple[np.ndarray, int, int]:
    """Stack the transposed bases into an (N*p, D) matrix after a shape check."""
    if len(points) == 0:
        raise DimensionError("need at least one point")
    ambient = points[0].ambient_dim
    subspace = points[0].subspace_dim
    for i, pt in enumerate(points):
        if pt.ambient_dim != ambient or pt.subspace_dim != subspace:
            raise DimensionError(
                f"point {i} has shape ({pt.ambient_dim}, {pt.subspace_dim}), "
                f"expected ({ambient}, {subspace})"
            )
    flat = np.concatenate([pt.basis.T for pt in points], axis=0)
    return flat, ambient, subspace


def pairwise_sq_distances(points: Sequence[GrassmannPoint]) -> np.ndarray:
    """N x N matrix of ``embedding_distance_sq`` over all pairs.

    Computed through cross-Gram blocks, which avoids forming any D x D
    projector: for orthonormal bases the projector inner product
    tr(X X^T Y Y^T) equals the squared Frobenius norm of X^T Y. The result
    is exactly symmetric with a zero diagonal. The (i, j) loop is expressed
    as one matrix product, so every entry lands in a fixed slot regardless
    of evaluation order.
    """
    flat, _, subspace = _stack_homogeneous(points)
    n = len(points)
    gram = flat @ flat.T
    cross = (gram**2).reshape(n, subspace, n, subspace).sum(axis=(1, 3))
    cross = 0.5 * (cross + cross.T)
    self_energy = np.diag(cross).copy()
    d2 = 0.5 * (self_energy[:, None] + self_energy[None, :]) - cross
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def cross_sq_distances(
    points_a: Sequence[GrassmannPoint], points_b: Sequence[GrassmannPoint]
) -> np.ndarray:
    """len(a) x len(b) matrix of ``embedding_distance_sq`` across two sets."""
    flat_a, amb_a, sub_a = _stack_homogeneous(points_a)
    flat_b, amb_b, sub_b = _stack_homogeneous(points_b)
    if amb_a != amb_b or sub_a != sub_b:
        raise DimensionError(
            f"point sets live on different manifolds: "
            f"({amb_a}, {sub_a}) vs ({amb_b}, {sub_b})"
        )
    na, nb = len(points_a), len(points_b)
    gram = flat_a @ flat_b.T
    cross = (gram**2).reshape(na, sub_a, nb, sub_b).sum(axis=(1, 3))
    ea = _self_energies(flat_a, na, sub_a)
    eb = _self_energies(flat_b, nb, sub_b)
    d2 = 0.5 * (ea[:, None] + eb[None, :]) - cross
    np.maximum(d2, 0.0, out=d2)
    return d2


def _self_energies(flat: np.ndarray, n: int, subspace: int) -> np.ndarray:
    """Per-point squared Frobenius norm of X^T X from the stacked layout."""
    blocks = flat.reshape(n, subspace, flat.shape[1])
    grams = np.einsum("iad,ibd->iab", blocks, blocks)
    return (grams**2).sum(axis=(1, 2))
