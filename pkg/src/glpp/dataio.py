"""On-disk formats and the seeded synthetic dataset generator.

Everything is plain text so artifacts stay diffable and portable.

Matrix file: a header line ``rows cols`` followed by one line per row of
space-separated decimals printed with 17 significant digits, which
round-trips 64-bit floats exactly.

Dataset directory: a ``manifest.txt`` of the form ::

    version 1
    count 90
    ambient 20
    subspace 2
    labeled 1
    point_00000.txt 0
    ...

with one entry line per point (label column present only when labeled is 1)
next to the referenced matrix files. Point file headers must agree with the
manifest; a mismatch is a hard error.

Model file: one header line
``glpp-model <version> <D> <d> <p> <N> <seed> <ridge> <iterations> <converged>``
followed by the projection matrix in the matrix format above.

All writes go through a temporary file and an atomic rename.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DimensionError,
    ParameterError,
    ParseError,
    ValidationError,
    VersionError,
)
from .graph import AffinityGraph
from .grassmann import DEFAULT_TOLERANCES, GrassmannPoint, Tolerances, reorthonormalize
from .learners import LabeledDataset
from .trainer import ProjectionModel

__all__ = [
    "Dataset",
    "SyntheticSpec",
    "MANIFEST_NAME",
    "save_matrix",
    "load_matrix",
    "save_dataset",
    "load_dataset",
    "save_model",
    "load_model",
    "save_graph",
    "load_graph",
    "generate_synthetic",
]

MANIFEST_NAME = "manifest.txt"
MANIFEST_VERSION = 1
MODEL_MAGIC = "glpp-model"
MODEL_VERSION = 1


@dataclass
class Dataset:
    """Ordered subspace points with optional labels."""

    points: list[GrassmannPoint]
    labels: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.points)

    @property
    def ambient_dim(self) -> int:
        return self.points[0].ambient_dim

    @property
    def subspace_dim(self) -> int:
        return self.points[0].subspace_dim

    def labeled(self) -> LabeledDataset:
        if self.labels is None:
            raise ValidationError("dataset has no labels")
        return LabeledDataset(points=list(self.points), labels=self.labels)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a seeded dataset of perturbed cluster subspaces.

    Each cluster gets a random base subspace; members add a Gaussian offset
    of the given Frobenius magnitude to the base matrix and reorthonormalize.
    Defaults produce the 3-cluster reference suite used across the tests.
    """

    clusters: int = 3
    points_per_cluster: int = 30
    ambient_dim: int = 20
    subspace_dim: int = 2
    perturbation: float = 0.1
    seed: int = 7

    def __post_init__(self) -> None:
        if self.clusters < 1:
            raise ParameterError(f"clusters must be >= 1, got {self.clusters}")
        if self.points_per_cluster < 1:
            raise ParameterError(
                f"points_per_cluster must be >= 1, got {self.points_per_cluster}"
            )
        if not 1 <= self.subspace_dim <= self.ambient_dim:
            raise ParameterError(
                f"need 1 <= p <= D, got p={self.subspace_dim}, D={self.ambient_dim}"
            )
        if not 0.0 < self.perturbation < math.pi / 2.0:
            raise ParameterError(
                f"perturbation must lie in (0, pi/2), got {self.perturbation}"
            )


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format_row(row: np.ndarray) -> str:
    return " ".join(f"{v:.17g}" for v in row)


def save_matrix(path, matrix: np.ndarray) -> None:
    """Write a 2-D array in the text matrix format."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise DimensionError(f"matrix must be 2-D, got shape {m.shape}")
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines.extend(_format_row(row) for row in m)
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def load_matrix(path) -> np.ndarray:
    """Read a text matrix file, reporting the line and column of any defect."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise ParseError(f"{path}:1: empty file")
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError(f"{path}:1: expected 'rows cols' header, got {lines[0]!r}")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(f"{path}:1: non-integer header {lines[0]!r}") from None
    if rows < 0 or cols < 1:
        raise ParseError(f"{path}:1: invalid dimensions {rows} x {cols}")
    if len(lines) < rows + 1:
        raise ParseError(f"{path}: expected {rows} data lines, found {len(lines) - 1}")
    out = np.empty((rows, cols))
    for r in range(rows):
        tokens = lines[r + 1].split()
        if len(tokens) != cols:
            raise ParseError(
                f"{path}:{r + 2}: expected {cols} values, got {len(tokens)}"
            )
        for c, token in enumerate(tokens):
            try:
                out[r, c] = float(token)
            except ValueError:
                raise ParseError(
                    f"{path}:{r + 2}: column {c + 1}: not a number: {token!r}"
                ) from None
    return out


def _point_name(index: int) -> str:
    return f"point_{index:05d}.txt"


def save_dataset(directory, points: Sequence[GrassmannPoint], labels=None) -> None:
    """Write points plus a manifest into a directory, creating it if needed."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    points = list(points)
    if not points:
        raise ParameterError("cannot save an empty dataset")
    ambient = points[0].ambient_dim
    subspace = points[0].subspace_dim
    if labels is not None:
        labels = np.asarray(labels, dtype=int)
        if labels.shape != (len(points),):
            raise ValidationError(
                f"{len(points)} points but labels shaped {labels.shape}"
            )
    entries = []
    for i, pt in enumerate(points):
        if pt.ambient_dim != ambient or pt.subspace_dim != subspace:
            raise DimensionError(f"point {i} does not match dataset dimensions")
        name = _point_name(i)
        save_matrix(directory / name, pt.basis)
        entries.append(f"{name} {labels[i]}" if labels is not None else name)
    manifest = [
        f"version {MANIFEST_VERSION}",
        f"count {len(points)}",
        f"ambient {ambient}",
        f"subspace {subspace}",
        f"labeled {1 if labels is not None else 0}",
    ]
    manifest.extend(entries)
    _atomic_write(directory / MANIFEST_NAME, "\n".join(manifest) + "\n")


def _header_value(lines: list[str], lineno: int, key: str, path: Path) -> int:
    if lineno > len(lines):
        raise ParseError(f"{path}:{lineno}: missing '{key}' line")
    tokens = lines[lineno - 1].split()
    if len(tokens) != 2 or tokens[0] != key:
        raise ParseError(
            f"{path}:{lineno}: expected '{key} <int>', got {lines[lineno - 1]!r}"
        )
    try:
        return int(tokens[1])
    except ValueError:
        raise ParseError(f"{path}:{lineno}: non-integer value {tokens[1]!r}") from None


def load_dataset(path, tol: Tolerances = DEFAULT_TOLERANCES) -> Dataset:
    """Load a dataset directory (or an explicit manifest path), validating it.

    Every point is checked against its declared dimensions and the
    orthonormality invariant; failures name the offending entry.
    """
    path = Path(path)
    manifest_path = path / MANIFEST_NAME if path.is_dir() else path
    base = manifest_path.parent
    lines = manifest_path.read_text().splitlines()

    version = _header_value(lines, 1, "version", manifest_path)
    if version != MANIFEST_VERSION:
        raise VersionError(
            f"{manifest_path}: unsupported version {version} "
            f"(supported: {MANIFEST_VERSION})"
        )
    count = _header_value(lines, 2, "count", manifest_path)
    ambient = _header_value(lines, 3, "ambient", manifest_path)
    subspace = _header_value(lines, 4, "subspace", manifest_path)
    labeled = _header_value(lines, 5, "labeled", manifest_path)
    if labeled not in (0, 1):
        raise ParseError(f"{manifest_path}:5: labeled must be 0 or 1, got {labeled}")
    entry_lines = lines[5:]
    if len(entry_lines) < count:
        raise ParseError(
            f"{manifest_path}: expected {count} entries, found {len(entry_lines)}"
        )

    points: list[GrassmannPoint] = []
    labels = np.empty(count, dtype=int) if labeled else None
    for idx in range(count):
        lineno = 6 + idx
        tokens = entry_lines[idx].split()
        expected = 2 if labeled else 1
        if len(tokens) != expected:
            raise ParseError(
                f"{manifest_path}:{lineno}: expected {expected} fields, "
                f"got {len(tokens)}"
            )
        name = tokens[0]
        if labeled:
            try:
                labels[idx] = int(tokens[1])
            except ValueError:
                raise ParseError(
                    f"{manifest_path}:{lineno}: non-integer label {tokens[1]!r}"
                ) from None
        basis = load_matrix(base / name)
        if basis.shape != (ambient, subspace):
            raise ValidationError(
                f"entry {idx} ({name}): file is {basis.shape[0]} x {basis.shape[1]} "
                f"but manifest declares {ambient} x {subspace}"
            )
        try:
            points.append(GrassmannPoint(basis, tol=tol))
        except (ValidationError, DimensionError) as exc:
            raise ValidationError(f"entry {idx} ({name}): {exc}") from None
    return Dataset(points=points, labels=labels)


def save_model(path, model: ProjectionModel) -> None:
    """Write a trained model: one metadata header line, then the map matrix."""
    ambient, subspace = model.source_dims
    header = (
        f"{MODEL_MAGIC} {MODEL_VERSION} {ambient} {model.target_dim} {subspace} "
        f"{model.n_train} {model.seed} {model.ridge:.17g} "
        f"{model.iterations_run} {1 if model.converged else 0}"
    )
    m = model.projection
    lines = [header, f"{m.shape[0]} {m.shape[1]}"]
    lines.extend(_format_row(row) for row in m)
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def load_model(path) -> ProjectionModel:
    """Read a model file back; training-only fields (graph, trace) stay empty."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise ParseError(f"{path}:1: empty file")
    tokens = lines[0].split()
    if len(tokens) != 10 or tokens[0] != MODEL_MAGIC:
        raise ParseError(f"{path}:1: malformed model header {lines[0]!r}")
    try:
        version = int(tokens[1])
    except ValueError:
        raise ParseError(f"{path}:1: non-integer version {tokens[1]!r}") from None
    if version != MODEL_VERSION:
        raise VersionError(
            f"{path}: unsupported model version {version} (supported: {MODEL_VERSION})"
        )
    try:
        ambient, target, subspace, n_train, seed = (int(t) for t in tokens[2:7])
        ridge = float(tokens[7])
        iterations = int(tokens[8])
        converged = bool(int(tokens[9]))
    except ValueError:
        raise ParseError(f"{path}:1: malformed header fields {lines[0]!r}") from None

    body = "\n".join(lines[1:]) + "\n"
    tmp_rows = body.splitlines()
    if not tmp_rows:
        raise ParseError(f"{path}:2: missing matrix block")
    matrix = _parse_matrix_lines(tmp_rows, path, offset=1)
    if matrix.shape != (ambient, target):
        raise ValidationError(
            f"{path}: matrix is {matrix.shape[0]} x {matrix.shape[1]} but header "
            f"declares {ambient} x {target}"
        )
    return ProjectionModel(
        projection=matrix,
        source_dims=(ambient, subspace),
        target_dim=target,
        n_train=n_train,
        seed=seed,
        ridge=ridge,
        iterations_run=iterations,
        converged=converged,
    )


def _parse_matrix_lines(lines: list[str], path: Path, offset: int) -> np.ndarray:
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError(f"{path}:{offset + 1}: expected matrix header, got {lines[0]!r}")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(f"{path}:{offset + 1}: non-integer header {lines[0]!r}") from None
    if len(lines) < rows + 1:
        raise ParseError(f"{path}: expected {rows} matrix lines, found {len(lines) - 1}")
    out = np.empty((rows, cols))
    for r in range(rows):
        tokens = lines[r + 1].split()
        if len(tokens) != cols:
            raise ParseError(
                f"{path}:{offset + r + 2}: expected {cols} values, got {len(tokens)}"
            )
        try:
            out[r] = [float(t) for t in tokens]
        except ValueError:
            raise ParseError(f"{path}:{offset + r + 2}: malformed number") from None
    return out


def save_graph(path, graph: AffinityGraph) -> None:
    """Dump a graph's weight matrix in the text matrix format (debug aid)."""
    save_matrix(path, graph.weights)


def load_graph(path) -> AffinityGraph:
    """Rebuild a graph (degrees and Laplacian included) from a weight dump."""
    return AffinityGraph.from_weights(load_matrix(path))


def generate_synthetic(spec: SyntheticSpec) -> LabeledDataset:
    """Seeded clusters of nearby subspaces with ground-truth labels.

    Draws one Gaussian base per cluster, orthonormalizes it, then gives each
    member a Gaussian ambient offset of Frobenius norm ``spec.perturbation``
    before reorthonormalizing. Identical specs produce bitwise identical
    datasets.
    """
    rng = np.random.default_rng(spec.seed)
    points: list[GrassmannPoint] = []
    labels: list[int] = []
    shape = (spec.ambient_dim, spec.subspace_dim)
    for cluster in range(spec.clusters):
        base = reorthonormalize(rng.standard_normal(shape)).basis
        for _ in range(spec.points_per_cluster):
            offset = rng.standard_normal(shape)
            offset *= spec.perturbation / np.linalg.norm(offset)
            points.append(reorthonormalize(base + offset))
            labels.append(cluster)
    return LabeledDataset(points=points, labels=np.asarray(labels, dtype=int))
