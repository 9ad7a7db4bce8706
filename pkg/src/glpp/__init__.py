"""Locality-preserving projections for subspace-valued data.

The library represents each sample as a point on a Grassmann manifold (a
D x p column-orthonormal basis), learns a D x d map that compresses those
points onto a lower-dimensional manifold while keeping nearby points nearby,
and ships the nearest-neighbor / k-means / scoring tools used to evaluate
the result.
"""

from .errors import (
    DimensionError,
    GlppError,
    LengthMismatch,
    NormalizationDegenerate,
    ParameterError,
    ParseError,
    RankDeficient,
    SolverFailure,
    ValidationError,
    VersionError,
)
from .grassmann import (
    DEFAULT_TOLERANCES,
    GrassmannPoint,
    Tolerances,
    cross_sq_distances,
    embedding_distance_sq,
    fix_column_signs,
    from_raw_matrix,
    pairwise_sq_distances,
    reorthonormalize,
    signed_qr,
    to_projector,
)
from .graph import AffinityGraph, build_grassmann_graph, build_vector_graph
from .trainer import (
    ProjectionModel,
    TrainerConfig,
    constraint_matrix,
    evaluate_objective,
    fit,
    normalize_points,
    projector_difference,
    select_dim,
    solve_projection,
    surrogate_matrix,
    transform,
)
from .learners import (
    ClusterAssignment,
    LabeledDataset,
    gkm_cluster,
    gknn_classify,
    lpp_fit_vectors,
)
from .metrics import EvalReport, accuracy, clustering_accuracy, knn_preservation, nmi
from .dataio import (
    Dataset,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    load_graph,
    load_matrix,
    load_model,
    save_dataset,
    save_graph,
    save_matrix,
    save_model,
)

__version__ = "0.1.0"

__all__ = [
    "GlppError",
    "DimensionError",
    "ParameterError",
    "RankDeficient",
    "NormalizationDegenerate",
    "SolverFailure",
    "LengthMismatch",
    "ParseError",
    "ValidationError",
    "VersionError",
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
    "AffinityGraph",
    "build_grassmann_graph",
    "build_vector_graph",
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
    "LabeledDataset",
    "ClusterAssignment",
    "lpp_fit_vectors",
    "gknn_classify",
    "gkm_cluster",
    "EvalReport",
    "accuracy",
    "clustering_accuracy",
    "nmi",
    "knn_preservation",
    "Dataset",
    "SyntheticSpec",
    "generate_synthetic",
    "save_matrix",
    "load_matrix",
    "save_dataset",
    "load_dataset",
    "save_model",
    "load_model",
    "save_graph",
    "load_graph",
]
