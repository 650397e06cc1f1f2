"""End-to-end orchestration: score -> label -> cluster -> train -> report.

``run_pipeline`` executes the stages in order, writes one JSON artifact per
stage into the output directory and returns the final report payload.  All
randomness derives from the single config seed, and every artifact is
re-creatable by running the matching CLI subcommand on the previous stage's
output.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import varclus
from .dataset import load_csv, normalize
from .dea import EfficiencyBins, evaluate_all
from .evaluation import WEIGHT_MODES, ModularReport, compare_pipelines
from .rm import VARIANTS, RmClassifier
from .som import SomClusterer

logger = logging.getLogger(__name__)

STAGES = ("load", "score", "cluster-vars", "cluster-records", "train", "evaluate")


@dataclass(frozen=True)
class PipelineConfig:
    """Single entry point for a full run; validated up front."""

    input_path: str
    out_dir: str = "."
    n_inputs: int | None = None
    bins: tuple[float, float] = (0.55, 0.7)
    k: int | None = None
    linkage: str = "average"
    learning_rate: float = 0.03
    epochs: int = 100
    radius: float | None = None
    order: int = 2
    ridge: float = 1e-4
    variant: str = "rm"
    folds: int = 10
    seed: int = 0
    stratified: bool = True
    weight_mode: str = "fold_size"
    timestamp: bool = True

    def validate(self) -> None:
        EfficiencyBins(tuple(self.bins))  # raises on bad cut points
        if self.k is not None and self.k < 1:
            raise ValueError("k override must be >= 1")
        if self.linkage not in varclus.LINKAGES:
            raise ValueError(f"linkage must be one of {varclus.LINKAGES}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}")

    def echo(self) -> dict:
        return {
            "input_path": str(self.input_path),
            "n_inputs": self.n_inputs,
            "bins": list(self.bins),
            "k": self.k,
            "linkage": self.linkage,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "radius": self.radius,
            "order": self.order,
            "ridge": self.ridge,
            "variant": self.variant,
            "folds": self.folds,
            "seed": self.seed,
            "stratified": self.stratified,
            "weight_mode": self.weight_mode,
        }


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run every stage and write artifacts under ``cfg.out_dir``.

    Artifacts: scores.json, labels.json, dendrogram.json, assignments.json,
    models/*.json, report.json.  Returns the report payload.
    """
    cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "models").mkdir(exist_ok=True)

    with _stage("load"):
        dataset = load_csv(cfg.input_path, n_inputs=cfg.n_inputs)
        logger.info("loaded %d records (%d inputs, %d outputs)", dataset.n, dataset.m, dataset.s)

    with _stage("score"):
        bins = EfficiencyBins(tuple(cfg.bins))
        scores = evaluate_all(dataset, bins)
        score_rows = [
            {
                "id": sc.dmu_id,
                "theta": sc.theta,
                "class": sc.performance.value,
                "reference_set": list(sc.reference_set),
            }
            for sc in scores
        ]
        _write_json(out / "scores.json", score_rows)
        labels = np.array([sc.performance.value for sc in scores])
        _write_json(
            out / "labels.json",
            [{"id": sc.dmu_id, "class": sc.performance.value} for sc in scores],
        )

    with _stage("cluster-vars"):
        corr = varclus.correlation_matrix(dataset)
        tree = varclus.agglomerate(corr, cfg.linkage, labels=dataset.feature_names)
        if cfg.k is not None:
            chosen_k = cfg.k
            selection = None
            logger.info("k=%d override given; skipping automatic selection", cfg.k)
        else:
            selection = varclus.select_k(tree, dataset, k_max=tree.leaf_count - 1)
            chosen_k = selection.k
            logger.info("selected k=%d", chosen_k)
        partition = varclus.cut(tree, min(chosen_k, tree.leaf_count))
        _write_json(out / "dendrogram.json", _dendrogram_payload(tree, cfg, chosen_k, selection, partition, dataset))

    with _stage("cluster-records"):
        Z, _ = normalize(dataset)
        som = SomClusterer(
            n_clusters=chosen_k,
            learning_rate=cfg.learning_rate,
            epochs=cfg.epochs,
            radius=cfg.radius,
            random_state=cfg.seed,
        )
        som.fit(Z)
        _write_json(
            out / "assignments.json",
            {
                "n_clusters": chosen_k,
                "codebooks": som.codebooks_.tolist(),
                "assignments": [
                    {"id": rid, "cluster": int(c)}
                    for rid, c in zip(dataset.ids, som.labels_)
                ],
                "sizes": np.bincount(som.labels_, minlength=chosen_k).tolist(),
            },
        )

    with _stage("train"):
        classifier = RmClassifier(order=cfg.order, ridge=cfg.ridge, variant=cfg.variant)
        _fit_and_save(classifier, Z, labels, out / "models" / "global.json")
        for g in range(chosen_k):
            idx = np.flatnonzero(som.labels_ == g)
            _fit_and_save(classifier, Z[idx], labels[idx], out / "models" / f"cluster-{g}.json")

    with _stage("evaluate"):
        report = compare_pipelines(
            dataset,
            labels,
            n_clusters=chosen_k,
            classifier=classifier,
            n_folds=cfg.folds,
            seed=cfg.seed,
            stratified=cfg.stratified,
            weight_mode=cfg.weight_mode,
            assignments=som.labels_,
        )
        payload = report_payload(report, cfg)
        if cfg.timestamp:
            payload["generated_at"] = datetime.now(timezone.utc).isoformat()
        _write_json(out / "report.json", payload)
    logger.info(
        "pipeline done: nonmodular=%.4f modular=%.4f",
        report.nonmodular_accuracy,
        report.modular_accuracy,
    )
    return payload


def report_payload(report: ModularReport, cfg: PipelineConfig | None = None) -> dict:
    payload = {
        "n_records": report.n_records,
        "n_folds": report.n_folds,
        "weight_mode": report.weight_mode,
        "seed": report.seed,
        "nonmodular_accuracy": report.nonmodular_accuracy,
        "modular_accuracy": report.modular_accuracy,
        "gain": report.gain,
        "weights": list(report.weights),
        "per_cluster": [
            {
                "cluster": c.cluster,
                "n_records": c.n_records,
                "n_correct": round(c.accuracy * c.n_records),
                "n_folds": c.n_folds,
                "accuracy": c.accuracy,
            }
            for c in report.per_cluster
        ],
    }
    if cfg is not None:
        payload["config"] = cfg.echo()
    return payload


def _fit_and_save(classifier: RmClassifier, X, y, path: Path) -> None:
    y = np.asarray(y)
    if np.unique(y).size < 2:
        warnings.warn(
            f"skipping {path.name}: only one class present in its training data",
            stacklevel=2,
        )
        return
    from sklearn.base import clone

    model = clone(classifier).fit(X, y)
    model.save_json(path)


def _dendrogram_payload(tree, cfg, chosen_k, selection, partition, dataset) -> dict:
    payload = {
        "linkage": cfg.linkage,
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
        payload["relative_gaps"] = {str(k): _finite(v) for k, v in selection.relative_gaps.items()}
        payload["valid"] = {str(k): v for k, v in selection.valid.items()}
        payload["warned"] = selection.warned
    return payload


def _finite(value: float):
    return float(value) if np.isfinite(value) else None


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")
    logger.info("wrote %s", path)


class _stage:
    """Context manager tagging errors with the stage they came from."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        logger.info("stage %s: start", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None:
            logger.error("stage %s failed: %s", self.name, exc)
        else:
            logger.info("stage %s: done", self.name)
        return False
