"""Command-line interface.

One subcommand per pipeline stage plus ``synth`` (dataset generator) and
``pipeline`` (everything end to end).  All outputs are JSON; datasets are
CSV.  Global flags: --seed, --out-dir, --no-timestamp, --log-level.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import varclus
from .dataset import (
    default_cluster_spec,
    generate_synthetic,
    load_csv,
    normalize,
    write_csv,
)
from .dea import EfficiencyBins, evaluate_all
from .evaluation import WEIGHT_MODES, compare_pipelines
from .exceptions import DeakitError
from .pipeline import PipelineConfig, report_payload, run_pipeline
from .rm import VARIANTS, RmClassifier
from .som import SomClusterer

logger = logging.getLogger(__name__)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper()),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except DeakitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deakit",
        description="Frontier-efficiency scoring, clustering and modular classification.",
    )
    parser.add_argument("--seed", type=int, default=0, help="base random seed")
    parser.add_argument("--out-dir", default=".", help="directory for artifacts")
    parser.add_argument(
        "--no-timestamp",
        action="store_true",
        help="omit timestamps from reports (for byte-identical reruns)",
    )
    parser.add_argument(
        "--log-level",
        default="warning",
        choices=["debug", "info", "warning", "error"],
        help="logging verbosity",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="CCR efficiency scores and performance classes")
    p.add_argument("--input", required=True, help="dataset CSV")
    p.add_argument("--inputs", type=int, default=None, help="override input column count")
    p.add_argument("--bins", type=_bins, default=(0.55, 0.7), help='cut points, e.g. "0.55,0.7"')
    p.add_argument("--out", default=None, help="output JSON (default: stdout)")
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("cluster-vars", help="agglomerative variable clustering")
    p.add_argument("--input", required=True, help="dataset CSV")
    p.add_argument("--inputs", type=int, default=None, help="override input column count")
    p.add_argument("--linkage", default="average", choices=list(varclus.LINKAGES))
    p.add_argument("--k", type=int, default=None, help="cluster count override (skips selection)")
    p.add_argument("--out", default=None, help="output JSON (default: stdout)")
    p.add_argument("--dot", default=None, help="also write a GraphViz dendrogram here")
    p.set_defaults(handler=cmd_cluster_vars)

    p = sub.add_parser("cluster-records", help="SOM record clustering")
    p.add_argument("--input", required=True, help="dataset CSV")
    p.add_argument("--inputs", type=int, default=None, help="override input column count")
    p.add_argument("--k", type=int, default=3, help="number of clusters")
    p.add_argument("--lr", type=float, default=0.03, help="initial learning rate")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--radius", type=float, default=None, help="initial neighborhood radius")
    p.add_argument("--seed", type=int, default=None, dest="sub_seed", help="stage seed")
    p.add_argument("--out", default=None, help="output JSON (default: stdout)")
    p.set_defaults(handler=cmd_cluster_records)

    p = sub.add_parser("train", help="fit a polynomial classifier on labeled records")
    p.add_argument("--input", required=True, help="dataset CSV")
    p.add_argument("--inputs", type=int, default=None, help="override input column count")
    p.add_argument("--labels", required=True, help="labels JSON ([{id, class}, ...])")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--ridge", type=float, default=1e-4)
    p.add_argument("--variant", default="rm", choices=list(VARIANTS))
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("evaluate", help="modular vs non-modular cross-validated accuracy")
    p.add_argument("--input", required=True, help="dataset CSV")
    p.add_argument("--inputs", type=int, default=None, help="override input column count")
    p.add_argument("--labels", default=None, help="labels JSON; default: score internally")
    p.add_argument("--bins", type=_bins, default=(0.55, 0.7), help="cut points for internal scoring")
    p.add_argument("--folds", type=_folds, default=10, help="fold count (>= 2)")
    p.add_argument("--seed", type=int, default=None, dest="sub_seed", help="stage seed")
    p.add_argument("--clusters", default=None, help="assignment JSON from cluster-records")
    p.add_argument("--k", type=int, default=3, help="SOM cluster count when --clusters absent")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--ridge", type=float, default=1e-4)
    p.add_argument("--variant", default="rm", choices=list(VARIANTS))
    p.add_argument("--weight-mode", default="fold_size", choices=list(WEIGHT_MODES))
    p.add_argument("--out", default=None, help="output JSON (default: stdout)")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a seeded synthetic dataset CSV")
    p.add_argument("--n", type=int, default=589, help="record count")
    p.add_argument("--m", type=int, default=3, help="input count")
    p.add_argument("--s", type=int, default=3, help="output count")
    p.add_argument("--seed", type=int, default=None, dest="sub_seed", help="generator seed")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("pipeline", help="run every stage and write artifacts")
    p.add_argument("--input", required=True, help="dataset CSV")
    p.add_argument("--inputs", type=int, default=None, help="override input column count")
    p.add_argument("--bins", type=_bins, default=(0.55, 0.7))
    p.add_argument("--k", type=int, default=None, help="cluster count override (skips selection)")
    p.add_argument("--linkage", default="average", choices=list(varclus.LINKAGES))
    p.add_argument("--lr", type=float, default=0.03)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--ridge", type=float, default=1e-4)
    p.add_argument("--variant", default="rm", choices=list(VARIANTS))
    p.add_argument("--folds", type=_folds, default=10)
    p.add_argument("--weight-mode", default="fold_size", choices=list(WEIGHT_MODES))
    p.add_argument("--seed", type=int, default=None, dest="sub_seed", help="pipeline seed")
    p.set_defaults(handler=cmd_pipeline)

    return parser


def _bins(text: str) -> tuple[float, float]:
    try:
        parts = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bins must be comma-separated numbers: {exc}")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("bins need exactly two cut points")
    return parts


def _folds(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("at least 2 folds are required")
    return value


def _seed(args) -> int:
    sub = getattr(args, "sub_seed", None)
    return args.seed if sub is None else sub


def _emit(payload, out_path) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text)
        logger.info("wrote %s", out_path)


def cmd_score(args) -> int:
    dataset = load_csv(args.input, n_inputs=args.inputs)
    bins = EfficiencyBins(args.bins)
    scores = evaluate_all(dataset, bins)
    _emit(
        [
            {
                "id": sc.dmu_id,
                "theta": sc.theta,
                "class": sc.performance.value,
                "reference_set": list(sc.reference_set),
            }
            for sc in scores
        ],
        args.out,
    )
    return 0


def cmd_cluster_vars(args) -> int:
    dataset = load_csv(args.input, n_inputs=args.inputs)
    corr = varclus.correlation_matrix(dataset)
    tree = varclus.agglomerate(corr, args.linkage, labels=dataset.feature_names)
    if args.k is not None:
        chosen_k, selection = args.k, None
        logger.info("k=%d override given; skipping automatic selection", args.k)
    else:
        selection = varclus.select_k(tree, dataset, k_max=tree.leaf_count - 1)
        chosen_k = selection.k
    partition = varclus.cut(tree, chosen_k)
    payload = {
        "linkage": args.linkage,
        "labels": list(tree.labels),
        "merges": [[a, b, h] for a, b, h in tree.merges],
        "chosen_k": chosen_k,
        "k_override": selection is None,
        "partition": partition,
        "stats": [
            {
                "variable": st.variable,
                "cluster": st.cluster,
                "own_r2": st.own_r2,
                "next_r2": st.next_r2,
                "one_minus_r2_ratio": st.one_minus_r2_ratio,
            }
            for st in varclus.cluster_stats(dataset, partition)
        ],
        "correlation_table": [
            {
                "variable": row.variable,
                "membership_count": row.membership_count,
                "correlations": list(row.correlations),
            }
            for row in varclus.cluster_correlation_table(dataset, partition)
        ],
    }
    if selection is not None:
        payload["relative_gaps"] = {
            str(k): (float(v) if np.isfinite(v) else None)
            for k, v in selection.relative_gaps.items()
        }
        payload["warned"] = selection.warned
    _emit(payload, args.out)
    if args.dot:
        Path(args.dot).write_text(varclus.dendrogram_to_dot(tree) + "\n")
        logger.info("wrote %s", args.dot)
    return 0


def cmd_cluster_records(args) -> int:
    dataset = load_csv(args.input, n_inputs=args.inputs)
    Z, _ = normalize(dataset)
    som = SomClusterer(
        n_clusters=args.k,
        learning_rate=args.lr,
        epochs=args.epochs,
        radius=args.radius,
        random_state=_seed(args),
    ).fit(Z)
    _emit(
        {
            "n_clusters": args.k,
            "codebooks": som.codebooks_.tolist(),
            "assignments": [
                {"id": rid, "cluster": int(c)} for rid, c in zip(dataset.ids, som.labels_)
            ],
            "sizes": np.bincount(som.labels_, minlength=args.k).tolist(),
        },
        args.out,
    )
    return 0


def _load_labels(path, dataset) -> np.ndarray:
    payload = json.loads(Path(path).read_text())
    if isinstance(payload, dict):
        mapping = payload
    else:
        mapping = {row["id"]: row["class"] for row in payload}
    missing = [rid for rid in dataset.ids if rid not in mapping]
    if missing:
        raise ValueError(f"labels file lacks entries for ids {missing[:5]}...")
    return np.array([mapping[rid] for rid in dataset.ids])


def cmd_train(args) -> int:
    dataset = load_csv(args.input, n_inputs=args.inputs)
    labels = _load_labels(args.labels, dataset)
    Z, _ = normalize(dataset)
    model = RmClassifier(order=args.order, ridge=args.ridge, variant=args.variant)
    model.fit(Z, labels)
    model.save_json(args.out)
    logger.info("wrote %s (%d terms, %d classes)", args.out, model.term_count_, model.classes_.size)
    return 0


def cmd_evaluate(args) -> int:
    dataset = load_csv(args.input, n_inputs=args.inputs)
    if args.labels:
        labels = _load_labels(args.labels, dataset)
    else:
        bins = EfficiencyBins(args.bins)
        labels = np.array([sc.performance.value for sc in evaluate_all(dataset, bins)])
    assignments = None
    n_clusters = args.k
    if args.clusters:
        payload = json.loads(Path(args.clusters).read_text())
        mapping = {row["id"]: int(row["cluster"]) for row in payload["assignments"]}
        missing = [rid for rid in dataset.ids if rid not in mapping]
        if missing:
            raise ValueError(f"assignment file lacks entries for ids {missing[:5]}...")
        assignments = np.array([mapping[rid] for rid in dataset.ids])
        n_clusters = int(payload["n_clusters"])
    classifier = RmClassifier(order=args.order, ridge=args.ridge, variant=args.variant)
    report = compare_pipelines(
        dataset,
        labels,
        n_clusters=n_clusters,
        classifier=classifier,
        n_folds=args.folds,
        seed=_seed(args),
        weight_mode=args.weight_mode,
        assignments=assignments,
    )
    payload = report_payload(report)
    payload["config"] = {
        "input_path": args.input,
        "folds": args.folds,
        "seed": _seed(args),
        "order": args.order,
        "ridge": args.ridge,
        "variant": args.variant,
        "weight_mode": args.weight_mode,
        "clusters_file": args.clusters,
        "labels_file": args.labels,
    }
    _emit(payload, args.out)
    return 0


def cmd_synth(args) -> int:
    seed = _seed(args)
    dataset = generate_synthetic(
        args.n, args.m, args.s, default_cluster_spec(args.m, args.s), seed=seed
    )
    write_csv(dataset, args.out, seed=seed)
    logger.info("wrote %s (%d records)", args.out, dataset.n)
    return 0


def cmd_pipeline(args) -> int:
    cfg = PipelineConfig(
        input_path=args.input,
        out_dir=args.out_dir,
        n_inputs=args.inputs,
        bins=args.bins,
        k=args.k,
        linkage=args.linkage,
        learning_rate=args.lr,
        epochs=args.epochs,
        radius=args.radius,
        order=args.order,
        ridge=args.ridge,
        variant=args.variant,
        folds=args.folds,
        seed=_seed(args),
        weight_mode=args.weight_mode,
        timestamp=not args.no_timestamp,
    )
    run_pipeline(cfg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
