"""Cross-validated accuracy, plain and per-cluster ("modular").

``weighted_cv`` scores a classifier with k-fold cross-validation, weighting
each fold's error by its share of the records.  ``compare_pipelines`` runs
the same classifier once on the whole dataset and once per record cluster,
then combines per-cluster accuracies with record-count weights so that a
modular model bank can be compared against a single global model on an equal
footing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .dataset import Dataset, normalize
from .exceptions import (
    EmptyClusterError,
    EmptyTrainingFoldError,
    TooFewRecordsError,
)
from .rm import RmClassifier
from .som import SomClusterer

WEIGHT_MODES = ("fold_size", "class_balanced")


@dataclass(frozen=True)
class FoldPlan:
    """Record-to-fold assignment; fold ids run 0..n_folds-1."""

    n_folds: int
    assignments: tuple[int, ...]
    seed: int
    stratified: bool

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.assignments) == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.assignments) != fold)

    def fold_sizes(self) -> np.ndarray:
        return np.bincount(np.asarray(self.assignments), minlength=self.n_folds)


def make_folds(labels, n_folds: int = 10, seed: int = 0, stratified: bool = True) -> FoldPlan:
    """Deal records into folds round-robin after a seeded shuffle.

    Stratified mode shuffles and deals each class separately, with the
    round-robin pointer carried across classes, so per-class fold counts
    differ by at most one and overall sizes stay balanced.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if n_folds < 2:
        raise ValueError("n_folds must be >= 2")
    if n < n_folds:
        raise TooFewRecordsError(f"{n} records cannot fill {n_folds} folds")
    rng = np.random.default_rng(seed)
    assignments = np.empty(n, dtype=int)
    if stratified:
        cursor = 0
        for cls in np.unique(labels):
            members = np.flatnonzero(labels == cls)
            members = members[rng.permutation(members.size)]
            for i, rec in enumerate(members):
                assignments[rec] = (cursor + i) % n_folds
            cursor = (cursor + members.size) % n_folds
    else:
        order = rng.permutation(n)
        for i, rec in enumerate(order):
            assignments[rec] = i % n_folds
    return FoldPlan(n_folds, tuple(int(a) for a in assignments), seed, stratified)


@dataclass(frozen=True)
class FoldResult:
    fold: int
    n_test: int
    error_rate: float
    class_weights: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CvReport:
    per_fold: tuple[FoldResult, ...]
    weighted_error: float
    weight_mode: str

    @property
    def accuracy(self) -> float:
        return 1.0 - self.weighted_error


def weighted_cv(
    X,
    labels,
    classifier,
    plan: FoldPlan,
    weight_mode: str = "fold_size",
) -> CvReport:
    """Cross-validate ``classifier`` under ``plan``.

    fold_size mode weights each fold's plain error rate by n_test / n;
    class_balanced mode first averages per-class error rates within the fold
    (macro error) and weights those the same way.  A training split that
    collapses to a single class falls back to constant prediction.
    """
    if weight_mode not in WEIGHT_MODES:
        raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}, got {weight_mode!r}")
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    n = labels.shape[0]
    if X.shape[0] != n or len(plan.assignments) != n:
        raise ValueError("X, labels and plan must cover the same records")
    results = []
    total_weighted = 0.0
    for fold in range(plan.n_folds):
        test_idx = plan.fold_indices(fold)
        train_idx = plan.train_indices(fold)
        if train_idx.size == 0:
            raise EmptyTrainingFoldError(f"fold {fold} leaves no training records")
        if test_idx.size == 0:
            results.append(FoldResult(fold, 0, 0.0))
            continue
        train_classes = np.unique(labels[train_idx])
        if train_classes.size < 2:
            predicted = np.full(test_idx.size, train_classes[0])
        else:
            model = clone(classifier)
            model.fit(X[train_idx], labels[train_idx])
            predicted = model.predict(X[test_idx])
        wrong = predicted != labels[test_idx]
        if weight_mode == "fold_size":
            err = float(np.mean(wrong))
        else:
            rates = [
                float(np.mean(wrong[labels[test_idx] == cls]))
                for cls in np.unique(labels[test_idx])
            ]
            err = float(np.mean(rates))
        weights = {
            _plain(cls): float(np.mean(labels[test_idx] == cls))
            for cls in np.unique(labels[test_idx])
        }
        results.append(FoldResult(fold, int(test_idx.size), err, weights))
        total_weighted += (test_idx.size / n) * err
    return CvReport(tuple(results), float(total_weighted), weight_mode)


@dataclass(frozen=True)
class ModularAccuracy:
    weights: tuple[float, ...]
    modular_ca: float


def modular_ca(per_cluster: list[tuple[int, float]], total: int | None = None) -> ModularAccuracy:
    """Record-count-weighted combination of per-cluster accuracies.

    ``per_cluster`` holds (n_records, accuracy) pairs; weights are
    n_i / total with ``total`` defaulting to the sum of the n_i.
    """
    if not per_cluster:
        raise EmptyClusterError("no clusters to combine")
    sizes = [n for n, _ in per_cluster]
    accs = [a for _, a in per_cluster]
    if any(n <= 0 for n in sizes):
        raise EmptyClusterError("every cluster must hold at least one record")
    if any(not 0.0 <= a <= 1.0 for a in accs):
        raise ValueError("accuracies must lie in [0, 1]")
    denom = float(total if total is not None else sum(sizes))
    if denom <= 0:
        raise ValueError("total must be positive")
    weights = tuple(n / denom for n in sizes)
    return ModularAccuracy(weights, float(sum(w * a for w, a in zip(weights, accs))))


@dataclass(frozen=True)
class ClusterResult:
    cluster: int
    n_records: int
    n_folds: int
    accuracy: float


@dataclass(frozen=True)
class ModularReport:
    per_cluster: tuple[ClusterResult, ...]
    weights: tuple[float, ...]
    modular_accuracy: float
    nonmodular_accuracy: float
    n_records: int
    n_folds: int
    weight_mode: str
    seed: int

    @property
    def gain(self) -> float:
        return self.modular_accuracy - self.nonmodular_accuracy


def compare_pipelines(
    dataset: Dataset,
    labels,
    n_clusters: int,
    classifier: RmClassifier | None = None,
    som: SomClusterer | None = None,
    n_folds: int = 10,
    seed: int = 0,
    stratified: bool = True,
    weight_mode: str = "fold_size",
    assignments=None,
) -> ModularReport:
    """Modular (per-SOM-cluster) vs. non-modular CV accuracy on one dataset.

    Records are z-scored once, clustered with a SOM, and the classifier is
    cross-validated globally and inside each cluster; per-cluster accuracies
    are then combined with record-count weights.  Sub-seeds are derived
    arithmetically from ``seed`` so every stage is reproducible.  Passing
    precomputed ``assignments`` skips the SOM fit.
    """
    labels = np.asarray(labels)
    if labels.shape[0] != dataset.n:
        raise ValueError("one label per record required")
    if classifier is None:
        classifier = RmClassifier()
    Z, _ = normalize(dataset)

    plan = make_folds(labels, n_folds, seed=seed + 1, stratified=stratified)
    nonmodular = weighted_cv(Z, labels, classifier, plan, weight_mode)

    if assignments is None:
        if som is None:
            som = SomClusterer(n_clusters=n_clusters, random_state=seed)
        else:
            som = clone(som)
            som.set_params(n_clusters=n_clusters)
        assignments = som.fit(Z).labels_
    else:
        assignments = np.asarray(assignments, dtype=int)
        if assignments.shape[0] != dataset.n:
            raise ValueError("one cluster assignment per record required")

    per_cluster = []
    for g in range(n_clusters):
        idx = np.flatnonzero(assignments == g)
        if idx.size == 0:
            raise EmptyClusterError(f"cluster {g} holds no records")
        if idx.size == 1:
            warnings.warn(
                f"cluster {g} holds a single record and cannot be "
                "cross-validated; scoring it 0",
                stacklevel=2,
            )
            per_cluster.append(ClusterResult(g, 1, 0, 0.0))
            continue
        folds_g = min(n_folds, idx.size)
        if folds_g < n_folds:
            warnings.warn(
                f"cluster {g} has {idx.size} records; reducing folds "
                f"{n_folds} -> {folds_g}",
                stacklevel=2,
            )
        plan_g = make_folds(labels[idx], folds_g, seed=seed + 2 + g, stratified=stratified)
        cv_g = weighted_cv(Z[idx], labels[idx], classifier, plan_g, weight_mode)
        per_cluster.append(ClusterResult(g, int(idx.size), folds_g, cv_g.accuracy))

    combined = modular_ca([(c.n_records, c.accuracy) for c in per_cluster])
    return ModularReport(
        per_cluster=tuple(per_cluster),
        weights=combined.weights,
        modular_accuracy=combined.modular_ca,
        nonmodular_accuracy=nonmodular.accuracy,
        n_records=dataset.n,
        n_folds=n_folds,
        weight_mode=weight_mode,
        seed=seed,
    )


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    return value
