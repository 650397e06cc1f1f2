"""Polynomial expansions and the ridge classifier."""

import numpy as np
import pytest
from oracles import oracle_expand_rm, oracle_ridge_coefficients
from sklearn.exceptions import NotFittedError

from deakit.exceptions import DimensionMismatchError, TooManyTermsError
from deakit.rm import (
    TERM_ORDER_VERSION,
    RmClassifier,
    expand_full_mp,
    expand_rm,
    expand_rm_prime,
    full_mp_term_count,
    rm_prime_term_count,
    rm_term_count,
    term_count,
)

# ---------------------------------------------------------------------------
# expansions


def test_term_counts_exhaustive():
    for l in range(1, 9):
        for r in range(2, 6):
            x = np.arange(1.0, l + 1.0)
            n_rm = expand_rm(x, r).shape[0]
            n_rmp = expand_rm_prime(x, r).shape[0]
            assert n_rm == rm_term_count(l, r) == 1 + r + l * (2 * r - 1)
            assert n_rmp == rm_prime_term_count(l, r) == 1 + r * (l + 1)
            assert n_rm - n_rmp == r * l - l


def test_hand_expansion():
    assert expand_rm([1.0, 1.0], 2).tolist() == [1, 1, 1, 1, 1, 2, 4, 2, 2]


def test_expansion_matches_loop_oracle(rng):
    for _ in range(30):
        l = int(rng.integers(1, 7))
        r = int(rng.integers(1, 5))
        x = rng.uniform(-3.0, 3.0, size=l)
        assert expand_rm(x, r) == pytest.approx(oracle_expand_rm(x, r), rel=1e-12)


def test_zero_vector_expansion():
    vec = expand_rm(np.zeros(2), 3)
    assert vec.shape == (rm_term_count(2, 3),)
    assert vec[0] == 1.0
    assert np.all(vec[1:] == 0.0)


def test_order_one_collapses_variants():
    x = np.array([2.0, 5.0, 7.0])
    assert expand_rm(x, 1).tolist() == expand_rm_prime(x, 1).tolist()
    assert expand_rm(x, 1).tolist() == [1.0, 2.0, 5.0, 7.0, 14.0]


def test_full_mp_graded_lex():
    assert expand_full_mp([2.0, 3.0], 2).tolist() == [1, 2, 3, 4, 6, 9]
    assert expand_full_mp([2.0], 3).tolist() == [1, 2, 4, 8]
    for l, r in ((2, 2), (3, 2), (2, 4)):
        x = np.arange(1.0, l + 1.0)
        assert expand_full_mp(x, r).shape[0] == full_mp_term_count(l, r)


def test_full_mp_term_limit():
    assert term_count(3, 3, "full_mp") == 20
    with pytest.raises(TooManyTermsError):
        expand_full_mp(np.ones(100), 4)  # C(104, 4) is far past the cap


def test_rm_terms_lie_in_full_span(rng):
    # every reduced term of order r is a polynomial of total degree <= r
    l, r = 3, 2
    X = rng.uniform(-2.0, 2.0, size=(40, l))
    P_rm = np.array([expand_rm(row, r) for row in X])
    P_full = np.array([expand_full_mp(row, r) for row in X])
    _, residuals, *_ = np.linalg.lstsq(P_full, P_rm, rcond=None)
    reproduced = P_full @ np.linalg.lstsq(P_full, P_rm, rcond=None)[0]
    assert np.abs(reproduced - P_rm).max() < 1e-8


def test_expansion_validation():
    with pytest.raises(ValueError):
        expand_rm([1.0], 0)
    with pytest.raises(ValueError):
        term_count(0, 2)
    with pytest.raises(ValueError):
        term_count(2, 2, "quadratic")


# ---------------------------------------------------------------------------
# ridge fit


def one_hot(y, classes):
    return (np.asarray(y)[:, None] == np.asarray(classes)[None, :]).astype(float)


def test_coefficients_match_bruteforce_oracle(rng):
    for _ in range(20):
        n = 60
        l = int(rng.integers(2, 5))
        r = int(rng.integers(1, 4))
        n_classes = int(rng.integers(2, 4))
        X = rng.normal(size=(n, l))
        y = rng.integers(0, n_classes, size=n)
        if np.unique(y).size < 2:
            y[0] = 0
            y[1] = 1
        clf = RmClassifier(order=r, ridge=0.1).fit(X, y)
        expected = oracle_ridge_coefficients(
            X.tolist(), one_hot(y, clf.classes_).tolist(), r, 0.1
        )
        scale = np.linalg.norm(expected)
        assert np.linalg.norm(clf.alpha_ - expected) <= 1e-8 * scale
        assert clf.normal_residual_ <= 1e-8 * (
            np.linalg.norm(_normal_rhs(X, y, clf)) + 1.0
        )


def _normal_rhs(X, y, clf):
    P = np.array([expand_rm(row, clf.order) for row in X])
    return P.T @ one_hot(y, clf.classes_)


def test_interpolation_with_zero_ridge(rng):
    # l=2, r=2 spans exactly the six degree-<=2 monomials (the sum and
    # weighted terms are linear combinations of them), so six generic
    # samples make P full row rank and b=0 hits the one-hot targets exactly
    X = rng.uniform(-1.0, 1.0, size=(6, 2))
    y = rng.integers(0, 2, size=6)
    y[:2] = [0, 1]
    clf = RmClassifier(order=2, ridge=0.0).fit(X, y)
    scores = clf.decision_function(X)
    assert scores == pytest.approx(one_hot(y, clf.classes_), abs=1e-6)
    assert np.array_equal(clf.predict(X), y)
    assert clf.normal_residual_ <= 1e-8 * (
        np.linalg.norm(_normal_rhs(X, y, clf)) + 1.0
    )


def test_huge_ridge_shrinks_coefficients(rng):
    X = rng.normal(size=(50, 3))
    y = rng.integers(0, 2, size=50)
    y[:2] = [0, 1]
    clf = RmClassifier(order=2, ridge=1e12).fit(X, y)
    assert np.abs(clf.alpha_).max() < 1e-6


def test_training_error_monotone_in_ridge(rng):
    X = rng.normal(size=(40, 2))
    y = (X[:, 0] + X[:, 1] > 0).astype(int)
    if np.unique(y).size < 2:
        y[0] = 1 - y[0]
    sses = []
    for b in (0.0, 1e-4, 1e-2, 1.0):
        clf = RmClassifier(order=2, ridge=b).fit(X, y)
        resid = clf.decision_function(X) - one_hot(y, clf.classes_)
        sses.append(float(np.sum(resid**2)))
    assert all(s2 >= s1 - 1e-9 for s1, s2 in zip(sses, sses[1:]))


def test_solution_is_stationary_point(rng):
    # the fitted coefficients zero the ridge objective's gradient:
    # finite differences along random directions stay ~0
    X = rng.normal(size=(30, 2))
    y = rng.integers(0, 2, size=30)
    y[:2] = [0, 1]
    b = 1e-2
    clf = RmClassifier(order=2, ridge=b).fit(X, y)
    P = np.array([expand_rm(row, 2) for row in X])
    Y = one_hot(y, clf.classes_)

    def objective(alpha):
        return float(np.sum((P @ alpha - Y) ** 2) + b * np.sum(alpha**2))

    h = 1e-6
    base_scale = 1.0 + abs(objective(clf.alpha_))
    for _ in range(5):
        v = rng.normal(size=clf.alpha_.shape)
        v /= np.linalg.norm(v)
        diff = (objective(clf.alpha_ + h * v) - objective(clf.alpha_ - h * v)) / (2 * h)
        assert abs(diff) <= 1e-4 * base_scale


def test_xor_needs_order_two(rng):
    base = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] * 10)
    X = base + 0.01 * rng.normal(size=base.shape)
    y = np.array([0, 1, 1, 0] * 10)
    order2 = RmClassifier(order=2).fit(X, y)
    assert np.mean(order2.predict(X) == y) == 1.0
    order1 = RmClassifier(order=1).fit(X, y)
    assert np.mean(order1.predict(X) == y) < 1.0


def test_separable_blobs_order_one(rng):
    a = rng.normal(size=(40, 3)) + [0.0, 0.0, 0.0]
    b = rng.normal(size=(40, 3)) + [8.0, 0.0, 0.0]
    X = np.vstack([a, b])
    y = np.array(["low"] * 40 + ["high"] * 40)
    clf = RmClassifier(order=1).fit(X, y)
    assert np.mean(clf.predict(X) == y) == 1.0


def test_multiclass_and_variant_paths(rng):
    X = np.vstack(
        [rng.normal(size=(30, 2)) + [c * 8.0, 0.0] for c in range(3)]
    )
    y = np.repeat([0, 1, 2], 30)
    for variant in ("rm", "rm_prime", "full_mp"):
        clf = RmClassifier(order=2, variant=variant).fit(X, y)
        assert clf.decision_function(X).shape == (90, 3)
        assert np.mean(clf.predict(X) == y) == 1.0
        assert clf.term_count_ == term_count(2, 2, variant)


def test_winner_take_all_tie_goes_to_lowest_class():
    clf = RmClassifier(order=1)
    clf.classes_ = np.array(["a", "b"])
    clf.alpha_ = np.zeros((4, 2))  # all scores identical
    clf.n_features_in_ = 2
    clf.term_count_ = 4
    assert clf.predict([[1.0, 2.0]]).tolist() == ["a"]


def test_positive_rescaling_of_scores_keeps_predictions(rng):
    X = rng.normal(size=(25, 2))
    y = rng.integers(0, 3, size=25)
    y[:3] = [0, 1, 2]
    clf = RmClassifier(order=2).fit(X, y)
    before = clf.predict(X)
    clf.alpha_ = clf.alpha_ * 7.5
    assert np.array_equal(clf.predict(X), before)


# ---------------------------------------------------------------------------
# persistence and validation


def test_persistence_round_trip(tmp_path, rng):
    X = rng.normal(size=(30, 3))
    y = rng.integers(0, 3, size=30)
    y[:3] = [0, 1, 2]
    clf = RmClassifier(order=2, ridge=1e-3, variant="rm_prime").fit(X, y)
    path = tmp_path / "model.json"
    clf.save_json(path)
    loaded = RmClassifier.load_json(path)
    assert loaded.variant == "rm_prime"
    assert loaded.order == 2 and loaded.ridge == 1e-3
    assert np.array_equal(loaded.predict(X), clf.predict(X))
    assert np.allclose(loaded.alpha_, clf.alpha_)


def test_persistence_schema_keys(rng):
    X = rng.normal(size=(20, 2))
    y = rng.integers(0, 2, size=20)
    y[:2] = [0, 1]
    payload = RmClassifier(order=2).fit(X, y).to_dict()
    assert set(payload) == {
        "term_order_version",
        "variant",
        "r",
        "b",
        "l",
        "class_labels",
        "alpha",
    }
    assert payload["term_order_version"] == TERM_ORDER_VERSION
    assert len(payload["alpha"]) == rm_term_count(2, 2)


def test_persistence_rejects_bad_payloads(rng):
    X = rng.normal(size=(20, 2))
    y = rng.integers(0, 2, size=20)
    y[:2] = [0, 1]
    payload = RmClassifier(order=2).fit(X, y).to_dict()
    stale = dict(payload, term_order_version="rm-v0")
    with pytest.raises(ValueError, match="version"):
        RmClassifier.from_dict(stale)
    truncated = dict(payload, alpha=payload["alpha"][:-1])
    with pytest.raises(ValueError, match="basis"):
        RmClassifier.from_dict(truncated)


def test_fit_validation(rng):
    X = rng.normal(size=(10, 2))
    with pytest.raises(DimensionMismatchError):
        RmClassifier().fit(X, np.zeros(9))
    with pytest.raises(ValueError):
        RmClassifier().fit(X, np.zeros(10))  # single class
    with pytest.raises(ValueError):
        RmClassifier(ridge=-1.0).fit(X, np.arange(10) % 2)
    with pytest.raises(NotFittedError):
        RmClassifier().predict(X)
    clf = RmClassifier().fit(X, np.arange(10) % 2)
    with pytest.raises(DimensionMismatchError):
        clf.predict(rng.normal(size=(4, 3)))
