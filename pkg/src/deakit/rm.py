"""Reduced multivariate polynomial classifiers.

Instead of the full multinomial basis (which explodes combinatorially), the
reduced expansions keep per-variable powers plus powers of the variable sum
and sum-weighted linear terms.  A ridge-regularized least-squares fit against
one-hot class targets then gives a linear model in the expanded basis; the
predicted class is the argmax over per-class scores.

Term layout is frozen (see TERM_ORDER_VERSION) so persisted models stay
readable:

* ``rm``       : [1] + [x_j^k, k=1..r (j inner)] + [s^j, j=1..r]
                 + [x * s^(j-1), j=2..r]     -> 1 + r + l*(2r - 1) terms
* ``rm_prime`` : [1] + [x_j] + [s^j, j=1..r] + [x * s^(j-1), j=2..r]
                 -> 1 + r*(l + 1) terms
* ``full_mp``  : all monomials of total degree <= r in graded
                 lexicographic order -> C(l + r, r) terms
"""

from __future__ import annotations

import json
from itertools import combinations_with_replacement
from math import comb
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lstsq
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils import check_array

from .exceptions import DimensionMismatchError, TooManyTermsError

VARIANTS = ("rm", "rm_prime", "full_mp")
TERM_ORDER_VERSION = "rm-v1"
MAX_FULL_MP_TERMS = 10_000
NORMAL_RESIDUAL_TOL = 1e-8


def rm_term_count(l: int, r: int) -> int:
    return 1 + r + l * (2 * r - 1)


def rm_prime_term_count(l: int, r: int) -> int:
    return 1 + r * (l + 1)


def full_mp_term_count(l: int, r: int) -> int:
    return comb(l + r, r)


def term_count(l: int, r: int, variant: str = "rm") -> int:
    _check_order(l, r, variant)
    if variant == "rm":
        return rm_term_count(l, r)
    if variant == "rm_prime":
        return rm_prime_term_count(l, r)
    return full_mp_term_count(l, r)


def _check_order(l: int, r: int, variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if l < 1:
        raise ValueError("need at least one input variable")
    if r < 1:
        raise ValueError("order must be >= 1")
    if variant == "full_mp" and full_mp_term_count(l, r) > MAX_FULL_MP_TERMS:
        raise TooManyTermsError(
            f"full basis for l={l}, r={r} has {full_mp_term_count(l, r)} terms "
            f"(limit {MAX_FULL_MP_TERMS})"
        )


def _expand_matrix(X: np.ndarray, r: int, variant: str) -> np.ndarray:
    """Row-wise basis expansion of an (n, l) matrix."""
    X = np.asarray(X, dtype=float)
    n, l = X.shape
    _check_order(l, r, variant)
    ones = np.ones((n, 1))
    if variant == "full_mp":
        cols = [ones]
        for degree in range(1, r + 1):
            for combo in combinations_with_replacement(range(l), degree):
                col = np.ones(n)
                for j in combo:
                    col = col * X[:, j]
                cols.append(col[:, None])
        return np.hstack(cols)

    s = X.sum(axis=1, keepdims=True)
    if variant == "rm":
        powers = [X**k for k in range(1, r + 1)]
    else:
        powers = [X]
    sums = [s**j for j in range(1, r + 1)]
    weighted = [X * s ** (j - 1) for j in range(2, r + 1)]
    return np.hstack([ones] + powers + sums + weighted)


def expand_rm(x, r: int) -> np.ndarray:
    """Reduced expansion of a single vector."""
    return _expand_matrix(np.atleast_2d(np.asarray(x, dtype=float)), r, "rm").ravel()


def expand_rm_prime(x, r: int) -> np.ndarray:
    """Reduced expansion without per-variable higher powers."""
    return _expand_matrix(
        np.atleast_2d(np.asarray(x, dtype=float)), r, "rm_prime"
    ).ravel()


def expand_full_mp(x, r: int) -> np.ndarray:
    """Complete monomial basis up to total degree r (graded-lex order)."""
    return _expand_matrix(
        np.atleast_2d(np.asarray(x, dtype=float)), r, "full_mp"
    ).ravel()


class RmClassifier(BaseEstimator, ClassifierMixin):
    """One-vs-all ridge regression in a reduced polynomial basis.

    Parameters
    ----------
    order : polynomial order r (>= 1).
    ridge : regularization strength b >= 0; b = 0 falls back to a
        minimum-norm least-squares solve when the normal matrix is singular.
    variant : "rm", "rm_prime" or "full_mp" basis.

    Attributes (after fit)
    ----------------------
    classes_ : sorted class labels.
    alpha_ : (n_terms, n_classes) coefficient matrix.
    term_count_ : expanded basis size.
    normal_residual_ : Frobenius residual of the normal equations.
    """

    def __init__(self, order: int = 2, ridge: float = 1e-4, variant: str = "rm"):
        self.order = order
        self.ridge = ridge
        self.variant = variant

    def fit(self, X, y):
        X = check_array(X, dtype=float)
        y = np.asarray(y)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DimensionMismatchError("y must be 1-D with one label per row of X")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        self.classes_ = np.unique(y)
        if self.classes_.size < 2:
            raise ValueError("need at least two distinct classes")
        P = _expand_matrix(X, self.order, self.variant)
        Y = (y[:, None] == self.classes_[None, :]).astype(float)
        G = P.T @ P + self.ridge * np.eye(P.shape[1])
        rhs = P.T @ Y
        bound = NORMAL_RESIDUAL_TOL * (np.linalg.norm(rhs) + 1.0)
        try:
            alpha = cho_solve(cho_factor(G), rhs)
            residual = float(np.linalg.norm(G @ alpha - rhs))
        except LinAlgError:
            alpha, residual = None, float("inf")
        if residual > bound:
            # Cholesky on a (near-)singular normal matrix can return a wildly
            # inaccurate solve instead of raising; stacking sqrt(b)*I rows
            # yields the same normal equations at sqrt the condition number.
            k = P.shape[1]
            if self.ridge > 0:
                root = np.sqrt(self.ridge)
                aug = np.vstack([P, root * np.eye(k)])
                target = np.vstack([Y, np.zeros((k, Y.shape[1]))])
            else:
                aug, target = P, Y
            alpha, *_ = lstsq(aug, target, lapack_driver="gelsy")
            residual = float(np.linalg.norm(G @ alpha - rhs))
        self.alpha_ = alpha
        self.term_count_ = P.shape[1]
        self.n_features_in_ = X.shape[1]
        self.normal_residual_ = residual
        return self

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return _expand_matrix(X, self.order, self.variant) @ self.alpha_

    def predict(self, X) -> np.ndarray:
        """Winner-take-all over per-class scores (ties -> lowest class)."""
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]

    def to_dict(self) -> dict:
        """Wire format: variant, polynomial order r, ridge strength b, input
        count l, class labels and the row-major coefficient matrix."""
        self._check_fitted()
        return {
            "term_order_version": TERM_ORDER_VERSION,
            "variant": self.variant,
            "r": self.order,
            "b": self.ridge,
            "l": self.n_features_in_,
            "class_labels": [_plain(c) for c in self.classes_],
            "alpha": self.alpha_.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RmClassifier":
        version = payload.get("term_order_version")
        if version != TERM_ORDER_VERSION:
            raise ValueError(
                f"unsupported term order version {version!r} "
                f"(this build writes {TERM_ORDER_VERSION!r})"
            )
        model = cls(
            order=int(payload["r"]),
            ridge=float(payload["b"]),
            variant=payload["variant"],
        )
        model.classes_ = np.asarray(payload["class_labels"])
        model.alpha_ = np.asarray(payload["alpha"], dtype=float)
        model.n_features_in_ = int(payload["l"])
        model.term_count_ = model.alpha_.shape[0]
        expected = term_count(model.n_features_in_, model.order, model.variant)
        if model.term_count_ != expected:
            raise ValueError(
                f"coefficient rows ({model.term_count_}) do not match the "
                f"{expected}-term basis"
            )
        if model.alpha_.shape[1] != model.classes_.size:
            raise ValueError("coefficient columns do not match class count")
        model.normal_residual_ = float(payload.get("normal_residual", 0.0))
        return model

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load_json(cls, path) -> "RmClassifier":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def _check_fitted(self) -> None:
        if not hasattr(self, "alpha_"):
            raise NotFittedError("RmClassifier is not fitted; call fit first")


def _plain(value):
    """Numpy scalar -> JSON-friendly python scalar."""
    if isinstance(value, np.generic):
        return value.item()
    return value
