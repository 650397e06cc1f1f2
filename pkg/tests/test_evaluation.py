"""Fold construction, weighted CV, and modular-vs-global comparison."""

import numpy as np
import pytest
from conftest import make_dataset, piecewise_dataset
from sklearn.base import BaseEstimator

from deakit.evaluation import (
    FoldPlan,
    compare_pipelines,
    make_folds,
    modular_ca,
    weighted_cv,
)
from deakit.exceptions import (
    EmptyClusterError,
    EmptyTrainingFoldError,
    TooFewRecordsError,
)
from deakit.rm import RmClassifier


class ConstantClassifier(BaseEstimator):
    """Always predicts the same label; errors are then exactly computable."""

    def __init__(self, value="a"):
        self.value = value

    def fit(self, X, y):
        return self

    def predict(self, X):
        return np.full(np.asarray(X).shape[0], self.value, dtype=object)


def blob_classification(rng, n_each=45, gap=8.0):
    a = rng.normal(size=(n_each, 3))
    b = rng.normal(size=(n_each, 3)) + [gap, 0.0, 0.0]
    X = np.vstack([a, b])
    y = np.array(["a"] * n_each + ["b"] * n_each)
    return X, y


# ---------------------------------------------------------------------------
# fold plans


def test_stratified_folds_balance_classes():
    labels = np.array(["a"] * 90 + ["b"] * 10)
    plan = make_folds(labels, n_folds=10, seed=3)
    sizes = plan.fold_sizes()
    assert sizes.sum() == 100
    assert sizes.tolist() == [10] * 10
    for fold in range(10):
        fold_labels = labels[plan.fold_indices(fold)]
        assert np.sum(fold_labels == "a") == 9
        assert np.sum(fold_labels == "b") == 1


def test_unstratified_folds_stay_size_balanced():
    labels = np.array(["a"] * 25 + ["b"] * 18)
    plan = make_folds(labels, n_folds=5, seed=1, stratified=False)
    sizes = plan.fold_sizes()
    assert sizes.sum() == 43
    assert sizes.max() - sizes.min() <= 1
    assert sorted(set(plan.assignments)) == [0, 1, 2, 3, 4]


def test_fold_determinism():
    labels = np.array(["a", "b"] * 30)
    assert make_folds(labels, 6, seed=4) == make_folds(labels, 6, seed=4)
    assert make_folds(labels, 6, seed=4) != make_folds(labels, 6, seed=5)


def test_fold_validation():
    labels = np.array(["a", "b", "a", "b"])
    with pytest.raises(ValueError):
        make_folds(labels, n_folds=1)
    with pytest.raises(TooFewRecordsError):
        make_folds(labels, n_folds=5)


def test_train_and_test_indices_partition_records():
    labels = np.array(["a"] * 12 + ["b"] * 9)
    plan = make_folds(labels, n_folds=4, seed=0)
    for fold in range(4):
        test = set(plan.fold_indices(fold).tolist())
        train = set(plan.train_indices(fold).tolist())
        assert test | train == set(range(21))
        assert not (test & train)


# ---------------------------------------------------------------------------
# weighted CV


def test_perfect_classifier_scores_zero_error(rng):
    X, y = blob_classification(rng)
    plan = make_folds(y, n_folds=5, seed=0)
    report = weighted_cv(X, y, RmClassifier(order=1), plan)
    assert report.weighted_error == 0.0
    assert report.accuracy == 1.0
    assert all(f.error_rate == 0.0 for f in report.per_fold)


def test_constant_predictor_error_equals_minority_share():
    labels = np.array(["a"] * 70 + ["b"] * 30)
    X = np.zeros((100, 2))
    plan = make_folds(labels, n_folds=10, seed=0)
    report = weighted_cv(X, labels, ConstantClassifier("a"), plan)
    assert report.weighted_error == pytest.approx(0.30, abs=1e-12)


def test_equal_folds_reduce_to_plain_mean(rng):
    labels = np.array(["a"] * 25 + ["b"] * 15)
    X = np.zeros((40, 2))
    plan = make_folds(labels, n_folds=4, seed=2, stratified=False)
    assert plan.fold_sizes().tolist() == [10] * 4
    report = weighted_cv(X, labels, ConstantClassifier("a"), plan)
    mean_err = np.mean([f.error_rate for f in report.per_fold])
    assert report.weighted_error == pytest.approx(mean_err, abs=1e-12)


def test_fold_results_record_sizes_and_weights(rng):
    X, y = blob_classification(rng, n_each=20)
    plan = make_folds(y, n_folds=4, seed=0)
    report = weighted_cv(X, y, RmClassifier(order=1), plan)
    assert sum(f.n_test for f in report.per_fold) == 40
    assert report.weight_mode == "fold_size"
    for f in report.per_fold:
        assert f.class_weights["a"] + f.class_weights["b"] == pytest.approx(1.0)


def test_class_balanced_macro_error_hand_check():
    # fold 0 and fold 1 each hold labels [a, a, a, b]; predicting the
    # constant "a" gives class errors 0 and 1 -> macro 0.5 vs plain 0.25
    labels = np.array(["a", "a", "a", "b"] * 2)
    X = np.zeros((8, 1))
    plan = FoldPlan(2, (0, 0, 0, 0, 1, 1, 1, 1), seed=0, stratified=False)
    plain = weighted_cv(X, labels, ConstantClassifier("a"), plan, "fold_size")
    macro = weighted_cv(X, labels, ConstantClassifier("a"), plan, "class_balanced")
    assert plain.weighted_error == pytest.approx(0.25, abs=1e-12)
    assert macro.weighted_error == pytest.approx(0.50, abs=1e-12)


def test_single_class_training_falls_back_to_constant():
    # each training split sees one class only; RmClassifier.fit would refuse,
    # so the fallback must predict that class without fitting
    labels = np.array(["a", "a", "b", "b"])
    X = np.arange(8.0).reshape(4, 2)
    plan = FoldPlan(2, (0, 0, 1, 1), seed=0, stratified=False)
    report = weighted_cv(X, labels, RmClassifier(), plan)
    assert report.weighted_error == pytest.approx(1.0)


def test_empty_training_fold_raises():
    labels = np.array(["a", "b", "a"])
    X = np.zeros((3, 1))
    plan = FoldPlan(2, (0, 0, 0), seed=0, stratified=False)
    with pytest.raises(EmptyTrainingFoldError):
        weighted_cv(X, labels, ConstantClassifier(), plan)


def test_weighted_cv_validation(rng):
    X, y = blob_classification(rng, n_each=10)
    plan = make_folds(y, n_folds=4, seed=0)
    with pytest.raises(ValueError):
        weighted_cv(X, y, ConstantClassifier(), plan, weight_mode="harmonic")
    with pytest.raises(ValueError):
        weighted_cv(X[:-1], y, ConstantClassifier(), plan)


# ---------------------------------------------------------------------------
# modular accuracy


def test_modular_ca_reference_fixture():
    combined = modular_ca(
        [(212, 0.9027), (227, 0.8945), (111, 0.8867)], total=527
    )
    assert combined.modular_ca == pytest.approx(0.9352, abs=1e-4)
    assert combined.weights == pytest.approx((212 / 527, 227 / 527, 111 / 527))


def test_modular_ca_defaults_to_convex_combination(rng):
    for _ in range(25):
        k = int(rng.integers(1, 6))
        sizes = rng.integers(1, 200, size=k)
        accs = rng.uniform(size=k)
        combined = modular_ca(list(zip(sizes.tolist(), accs.tolist())))
        assert sum(combined.weights) == pytest.approx(1.0, abs=1e-12)
        assert accs.min() - 1e-12 <= combined.modular_ca <= accs.max() + 1e-12


def test_modular_ca_validation():
    with pytest.raises(EmptyClusterError):
        modular_ca([])
    with pytest.raises(EmptyClusterError):
        modular_ca([(0, 0.5)])
    with pytest.raises(ValueError):
        modular_ca([(5, 1.3)])
    with pytest.raises(ValueError):
        modular_ca([(5, 0.5)], total=0)


# ---------------------------------------------------------------------------
# modular vs non-modular comparison


def test_single_cluster_report_mirrors_plain_cv(rng):
    X, y = blob_classification(rng, n_each=30)
    dataset = make_dataset(np.abs(X) + 1.0, np.ones((60, 1)))
    report = compare_pipelines(
        dataset, y, n_clusters=1, classifier=RmClassifier(order=1),
        n_folds=5, assignments=np.zeros(60, dtype=int),
    )
    assert report.weights == (1.0,)
    assert report.modular_accuracy == report.per_cluster[0].accuracy
    assert report.n_records == 60


def test_piecewise_problem_favours_modular_models():
    dataset, labels = piecewise_dataset(seed=0)
    report = compare_pipelines(
        dataset, labels, n_clusters=3, classifier=RmClassifier(order=2),
        n_folds=10, seed=0,
    )
    assert report.modular_accuracy > report.nonmodular_accuracy
    assert report.gain > 0.0
    assert all(c.n_records > 0 for c in report.per_cluster)


def test_easy_problem_keeps_pipelines_close(rng):
    X, y = blob_classification(rng, n_each=60, gap=12.0)
    dataset = make_dataset(np.abs(X) + 20.0, np.ones((120, 1)))
    report = compare_pipelines(
        dataset, y, n_clusters=2, classifier=RmClassifier(order=1),
        n_folds=5, seed=1,
    )
    assert report.nonmodular_accuracy > 0.9
    assert abs(report.gain) <= 0.05


def test_compare_pipelines_is_deterministic():
    dataset, labels = piecewise_dataset(seed=3, per_blob=40)
    kwargs = dict(n_clusters=3, classifier=RmClassifier(order=2), n_folds=5, seed=7)
    assert compare_pipelines(dataset, labels, **kwargs) == compare_pipelines(
        dataset, labels, **kwargs
    )


def test_small_cluster_reduces_fold_count(rng):
    X, y = blob_classification(rng, n_each=15)
    dataset = make_dataset(np.abs(X) + 1.0, np.ones((30, 1)))
    assignments = np.array([0] * 25 + [1] * 5)
    with pytest.warns(UserWarning, match="reducing folds 10 -> 5"):
        report = compare_pipelines(
            dataset, y, n_clusters=2, classifier=RmClassifier(order=1),
            n_folds=10, assignments=assignments,
        )
    assert report.per_cluster[0].n_folds == 10
    assert report.per_cluster[1].n_folds == 5


def test_single_record_cluster_scores_zero(rng):
    X, y = blob_classification(rng, n_each=13)
    dataset = make_dataset(np.abs(X) + 1.0, np.ones((26, 1)))
    assignments = np.array([0] * 25 + [1])
    with pytest.warns(UserWarning, match="single record"):
        report = compare_pipelines(
            dataset, y, n_clusters=2, classifier=RmClassifier(order=1),
            n_folds=5, assignments=assignments,
        )
    lone = report.per_cluster[1]
    assert (lone.n_records, lone.n_folds, lone.accuracy) == (1, 0, 0.0)


def test_compare_pipelines_validation(rng):
    X, y = blob_classification(rng, n_each=10)
    dataset = make_dataset(np.abs(X) + 1.0, np.ones((20, 1)))
    with pytest.raises(ValueError, match="one label per record"):
        compare_pipelines(dataset, y[:-1], n_clusters=2)
    with pytest.raises(ValueError, match="assignment per record"):
        compare_pipelines(dataset, y, n_clusters=2, assignments=np.zeros(7, dtype=int))
    with pytest.raises(EmptyClusterError):
        compare_pipelines(
            dataset, y, n_clusters=2, n_folds=5,
            assignments=np.zeros(20, dtype=int),
        )
