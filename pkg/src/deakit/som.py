"""Record clustering with a 1-by-k self-organizing map.

Units sit on a line; each presented record pulls its best-matching unit and,
through a Gaussian neighborhood that narrows over training, the unit's line
neighbors.  With a shrinking learning rate the codebooks settle into k
prototype vectors and records are assigned to their nearest codebook.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils import check_array

from .exceptions import DimensionMismatchError, TooFewRecordsError

FINAL_RADIUS = 0.01
MAX_REPAIR_ROUNDS = 5


def cluster_sizes(assignments, n_clusters: int) -> np.ndarray:
    """Occupancy count per cluster id (0..n_clusters-1)."""
    assignments = np.asarray(assignments, dtype=int)
    if assignments.size and (assignments.min() < 0 or assignments.max() >= n_clusters):
        raise ValueError("assignment outside [0, n_clusters)")
    return np.bincount(assignments, minlength=n_clusters)


class SomClusterer(BaseEstimator, ClusterMixin):
    """1-by-k online SOM with seeded, reproducible training.

    Parameters
    ----------
    n_clusters : number of units on the line.
    learning_rate : initial step size; decays linearly to 0 over training.
    epochs : full passes over the data (records shuffled each epoch).
    radius : initial Gaussian neighborhood width; defaults to n_clusters / 2
        and decays linearly to 0.01.
    random_state : seed controlling codebook init, shuffles and repair.

    Attributes (after fit)
    ----------------------
    codebooks_ : (n_clusters, n_features) prototype vectors.
    labels_ : training-set assignments.
    epochs_run_ : total epochs including post-repair settling.
    repair_rounds_ : empty-unit repair passes performed.
    """

    def __init__(
        self,
        n_clusters: int = 3,
        learning_rate: float = 0.03,
        epochs: int = 100,
        radius: float | None = None,
        random_state: int = 0,
    ):
        self.n_clusters = n_clusters
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.radius = radius
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        k = self.n_clusters
        if k < 1:
            raise ValueError("n_clusters must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        n = X.shape[0]
        if n < k:
            raise TooFewRecordsError(f"{n} records cannot seed {k} clusters")

        rng = np.random.default_rng(self.random_state)
        seeds = rng.choice(n, size=k, replace=False)
        W = X[seeds].astype(float).copy()
        r0 = self.radius if self.radius is not None else k / 2.0

        total = self.epochs
        self._train(X, W, rng, start=0, stop=self.epochs, total=total, r0=r0)
        labels = self._assign(X, W)

        extra = max(1, math.ceil(0.1 * self.epochs))
        rounds = 0
        while rounds < MAX_REPAIR_ROUNDS and len(np.unique(labels)) < k:
            empty = np.setdiff1d(np.arange(k), np.unique(labels))
            # re-seed each empty unit at the record worst served by the map
            err = np.linalg.norm(X - W[labels], axis=1)
            for unit, rec in zip(empty, np.argsort(-err)[: empty.size]):
                W[unit] = X[rec]
            self._train(
                X, W, rng, start=total, stop=total + extra, total=total + extra, r0=r0
            )
            total += extra
            labels = self._assign(X, W)
            rounds += 1
        if len(np.unique(labels)) < k:
            warnings.warn(
                "empty SOM unit(s) remain after repair; cluster sizes include zeros",
                stacklevel=2,
            )

        self.codebooks_ = W
        self.labels_ = labels
        self.epochs_run_ = total
        self.repair_rounds_ = rounds
        self.n_features_in_ = X.shape[1]
        return self

    def _train(self, X, W, rng, start, stop, total, r0) -> None:
        """Run epochs [start, stop) of a schedule spanning ``total`` epochs.

        Learning rate decays lr * (1 - e/total); radius interpolates r0 ->
        FINAL_RADIUS across the whole schedule, so repair epochs continue the
        cooled-down tail instead of re-heating the map.
        """
        k = W.shape[0]
        units = np.arange(k, dtype=float)
        n = X.shape[0]
        for epoch in range(start, stop):
            alpha = self.learning_rate * (1.0 - epoch / total)
            frac = epoch / (total - 1) if total > 1 else 1.0
            sigma = max(r0 + (FINAL_RADIUS - r0) * frac, FINAL_RADIUS)
            for i in rng.permutation(n):
                diff = X[i] - W
                bmu = int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
                h = np.exp(-((units - bmu) ** 2) / (2.0 * sigma**2))
                W += (alpha * h)[:, None] * diff

    @staticmethod
    def _assign(X, W) -> np.ndarray:
        d2 = ((X[:, None, :] - W[None, :, :]) ** 2).sum(axis=2)
        return d2.argmin(axis=1)

    def predict(self, X) -> np.ndarray:
        """Nearest-codebook assignment (ties go to the lowest unit id)."""
        self._check_fitted()
        X = check_array(X, dtype=float)
        if X.shape[1] != self.codebooks_.shape[1]:
            raise DimensionMismatchError(
                f"expected {self.codebooks_.shape[1]} features, got {X.shape[1]}"
            )
        return self._assign(X, self.codebooks_)

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).labels_

    def quantization_error(self, X) -> float:
        """Mean Euclidean distance of records to their assigned codebook."""
        self._check_fitted()
        X = check_array(X, dtype=float)
        labels = self.predict(X)
        return float(np.linalg.norm(X - self.codebooks_[labels], axis=1).mean())

    def _check_fitted(self) -> None:
        if not hasattr(self, "codebooks_"):
            raise NotFittedError("SomClusterer is not fitted; call fit first")
