"""Command-line front end: generate, train, transform, classify, cluster, score.

Exit codes: 0 on success, 2 for usage or parameter problems, 1 for any other
library error. Errors print a single ``ErrorClass: message`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dataio import (
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    load_model,
    save_dataset,
    save_model,
    _atomic_write,
)
from .errors import GlppError, LengthMismatch, ParameterError
from .grassmann import Tolerances
from .learners import gkm_cluster, gknn_classify
from .metrics import EvalReport, accuracy, clustering_accuracy, knn_preservation, nmi
from .trainer import TrainerConfig, fit, select_dim, transform

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glpp",
        description="Locality-preserving dimensionality reduction for subspace data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a seeded synthetic dataset")
    gen.add_argument("--clusters", type=int, default=3)
    gen.add_argument("--per-cluster", type=int, default=30)
    gen.add_argument("--ambient", type=int, default=20)
    gen.add_argument("--subspace", type=int, default=2)
    gen.add_argument("--perturb", type=float, default=0.1)
    gen.add_argument("--seed", type=int, default=7)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen)

    train = sub.add_parser("train", help="fit a projection model on a dataset")
    train.add_argument("--data", required=True)
    dim_group = train.add_mutually_exclusive_group(required=True)
    dim_group.add_argument("--dim", type=int, help="reduced ambient dimension")
    dim_group.add_argument(
        "--energy", type=float, help="pick the dimension from this energy rate"
    )
    train.add_argument("--heat", type=float, default=1.0)
    train.add_argument("--max-iter", type=int, default=50)
    train.add_argument("--tol", type=float, default=1e-6)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--out", required=True)
    train.set_defaults(func=_cmd_train)

    trans = sub.add_parser("transform", help="map a dataset through a model")
    trans.add_argument("--model", required=True)
    trans.add_argument("--data", required=True)
    trans.add_argument("--out", required=True)
    trans.set_defaults(func=_cmd_transform)

    knn = sub.add_parser("knn", help="nearest-neighbor classification accuracy")
    knn.add_argument("--train", required=True)
    knn.add_argument("--test", required=True)
    knn.add_argument("--k", type=int, default=5)
    knn.add_argument("--report", help="also write a JSON report here")
    knn.set_defaults(func=_cmd_knn)

    km = sub.add_parser("kmeans", help="k-means clustering scored against labels")
    km.add_argument("--data", required=True)
    km.add_argument("--k", type=int, required=True)
    km.add_argument("--seed", type=int, default=0)
    km.add_argument("--max-iter", type=int, default=100)
    km.add_argument("--report", help="also write a JSON report here")
    km.set_defaults(func=_cmd_kmeans)

    ev = sub.add_parser(
        "eval-embed", help="neighborhood preservation between two datasets"
    )
    ev.add_argument("--before", required=True)
    ev.add_argument("--after", required=True)
    ev.add_argument("--k", type=int, default=5)
    ev.add_argument("--report", help="also write a JSON report here")
    ev.set_defaults(func=_cmd_eval_embed)

    return parser


def _tol_lines(tol: Tolerances) -> list[str]:
    return [
        f"tol_orthonormality={tol.orthonormality:.17g}",
        f"tol_rank_cutoff={tol.rank_cutoff:.17g}",
    ]


def _write_report(path: str, report: EvalReport, tol: Tolerances) -> None:
    payload = {
        "task": report.task,
        "n_samples": report.n_samples,
        "acc": report.acc,
        "nmi": report.nmi,
        "knn_preservation": report.knn_preservation,
        "tolerances": {
            "orthonormality": tol.orthonormality,
            "rank_cutoff": tol.rank_cutoff,
        },
    }
    _atomic_write(Path(path), json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _emit_report(report: EvalReport, path: str | None, tol: Tolerances) -> None:
    print(report.to_line())
    for line in _tol_lines(tol):
        print(line)
    if path:
        _write_report(path, report, tol)


def _cmd_gen(args, tol: Tolerances) -> int:
    spec = SyntheticSpec(
        clusters=args.clusters,
        points_per_cluster=args.per_cluster,
        ambient_dim=args.ambient,
        subspace_dim=args.subspace,
        perturbation=args.perturb,
        seed=args.seed,
    )
    data = generate_synthetic(spec)
    save_dataset(args.out, data.points, data.labels)
    print(f"out={args.out}")
    print(f"count={len(data.points)}")
    print(f"ambient={spec.ambient_dim}")
    print(f"subspace={spec.subspace_dim}")
    return 0


def _cmd_train(args, tol: Tolerances) -> int:
    data = load_dataset(args.data, tol=tol)
    ambient = data.ambient_dim
    subspace = data.subspace_dim
    if args.energy is not None:
        dim = select_dim(data.points, args.energy)
        print(f"selected_dim={dim}")
    else:
        dim = args.dim
    if not subspace <= dim < ambient:
        raise ParameterError(
            f"need p <= d < D, got p={subspace}, d={dim}, D={ambient}"
        )
    config = TrainerConfig(
        max_iterations=args.max_iter,
        rel_tolerance=args.tol,
        heat=args.heat,
        seed=args.seed,
    )
    model = fit(data.points, dim, config)
    save_model(args.out, model)
    print(f"model={args.out}")
    print(f"dim={dim}")
    print(f"iterations={model.iterations_run}")
    print(f"converged={1 if model.converged else 0}")
    print(f"objective_initial={model.objective_trace[0]:.17g}")
    print(f"objective_final={model.objective_trace[-1]:.17g}")
    for line in _tol_lines(tol):
        print(line)
    return 0


def _cmd_transform(args, tol: Tolerances) -> int:
    model = load_model(args.model)
    data = load_dataset(args.data, tol=tol)
    reduced = [transform(model, pt) for pt in data.points]
    save_dataset(args.out, reduced, data.labels)
    print(f"out={args.out}")
    print(f"count={len(reduced)}")
    print(f"ambient={model.target_dim}")
    return 0


def _cmd_knn(args, tol: Tolerances) -> int:
    train = load_dataset(args.train, tol=tol).labeled()
    test = load_dataset(args.test, tol=tol).labeled()
    predicted = [gknn_classify(train, pt, args.k) for pt in test.points]
    report = EvalReport(
        task="classification",
        n_samples=len(test),
        acc=accuracy(predicted, test.labels),
    )
    _emit_report(report, args.report, tol)
    return 0


def _cmd_kmeans(args, tol: Tolerances) -> int:
    data = load_dataset(args.data, tol=tol).labeled()
    result = gkm_cluster(data.points, args.k, seed=args.seed, max_iter=args.max_iter)
    report = EvalReport(
        task="clustering",
        n_samples=len(data),
        acc=clustering_accuracy(result.assignments, data.labels),
        nmi=nmi(result.assignments, data.labels),
    )
    _emit_report(report, args.report, tol)
    return 0


def _cmd_eval_embed(args, tol: Tolerances) -> int:
    before = load_dataset(args.before, tol=tol)
    after = load_dataset(args.after, tol=tol)
    if len(before) != len(after):
        raise LengthMismatch(
            f"{len(before)} points before vs {len(after)} after"
        )
    score = knn_preservation(before.points, after.points, args.k)
    report = EvalReport(
        task="embedding", n_samples=len(before), knn_preservation=score
    )
    _emit_report(report, args.report, tol)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    tol = Tolerances.from_env()
    try:
        return args.func(args, tol)
    except ParameterError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except GlppError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
