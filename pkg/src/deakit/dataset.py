"""Loading, validation, normalization and synthesis of DMU tables.

A decision-making unit (DMU) is one evaluated entity, e.g. a bank branch,
described by ``m`` strictly positive input measures and ``s`` non-negative
output measures.  The :class:`Dataset` is the single source of truth for
feature ordering: inputs first, outputs second, in declaration order.

CSV dialect: UTF-8, comma delimiter, ``.`` decimal separator, one header row
``id,<inputs...>,<outputs...>``.  An optional ``#inputs=<m>`` directive line
before the header declares the input/output split; ``# seed=<n>`` comments
mark synthetic files.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array

from .exceptions import (
    BadProportionsError,
    DuplicateIdError,
    MalformedRowError,
    NonPositiveInputError,
    TooFewRowsError,
)


@dataclass(frozen=True)
class BranchRecord:
    """One DMU: an id plus its input and output measures."""

    id: str
    inputs: tuple[float, ...]
    outputs: tuple[float, ...]

    def validate(self) -> None:
        if any(not np.isfinite(v) for v in self.inputs + self.outputs):
            raise MalformedRowError(f"record {self.id!r}: non-finite value")
        if any(v <= 0.0 for v in self.inputs):
            raise NonPositiveInputError(
                f"record {self.id!r}: inputs must be strictly positive, got {self.inputs}"
            )
        if any(v < 0.0 for v in self.outputs):
            raise NonPositiveInputError(
                f"record {self.id!r}: outputs must be non-negative, got {self.outputs}"
            )
        if not any(v > 0.0 for v in self.outputs):
            raise NonPositiveInputError(
                f"record {self.id!r}: at least one output must be positive"
            )


@dataclass(frozen=True)
class Dataset:
    """An ordered, validated table of DMUs.

    Immutable after construction; every operation on it is a pure function,
    so instances are safe to share across threads.
    """

    input_names: tuple[str, ...]
    output_names: tuple[str, ...]
    records: tuple[BranchRecord, ...]

    def __post_init__(self):
        if len(self.input_names) < 1 or len(self.output_names) < 1:
            raise MalformedRowError("need at least one input and one output column")
        if len(self.records) < 1:
            raise TooFewRowsError("dataset needs at least one record")
        m, s = self.m, self.s
        seen: set[str] = set()
        for rec in self.records:
            if rec.id in seen:
                raise DuplicateIdError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)
            if len(rec.inputs) != m or len(rec.outputs) != s:
                raise MalformedRowError(
                    f"record {rec.id!r}: expected {m} inputs / {s} outputs, "
                    f"got {len(rec.inputs)} / {len(rec.outputs)}"
                )
            rec.validate()

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def m(self) -> int:
        return len(self.input_names)

    @property
    def s(self) -> int:
        return len(self.output_names)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.input_names + self.output_names

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(rec.id for rec in self.records)

    def input_matrix(self) -> np.ndarray:
        """n x m matrix of raw input values."""
        return np.array([rec.inputs for rec in self.records], dtype=float)

    def output_matrix(self) -> np.ndarray:
        """n x s matrix of raw output values."""
        return np.array([rec.outputs for rec in self.records], dtype=float)

    def feature_matrix(self) -> np.ndarray:
        """n x (m+s) matrix, inputs before outputs."""
        return np.hstack([self.input_matrix(), self.output_matrix()])


@dataclass(frozen=True)
class NormalizationStats:
    """Per-feature means and standard deviations used for z-scoring."""

    means: tuple[float, ...]
    stddevs: tuple[float, ...]


class ZScoreScaler(BaseEstimator, TransformerMixin):
    """Column-wise z-scoring with sample (n-1 denominator) standard deviation.

    Constant columns are centered and their divisor forced to 1 so the row
    count survives; a warning is emitted because downstream correlation-based
    steps cannot use such columns.

    Attributes
    ----------
    means_ : ndarray of shape (n_features,)
    stddevs_ : ndarray of shape (n_features,)
        Sample standard deviations, with 1.0 substituted for constant columns.
    constant_mask_ : ndarray of bool, shape (n_features,)
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if X.shape[0] < 2:
            raise TooFewRowsError("normalization needs at least 2 rows")
        self.means_ = X.mean(axis=0)
        std = X.std(axis=0, ddof=1)
        self.constant_mask_ = std <= 0.0
        if self.constant_mask_.any():
            warnings.warn(
                "constant feature column(s) %s: centered, divisor forced to 1"
                % np.flatnonzero(self.constant_mask_).tolist(),
                stacklevel=2,
            )
        std = np.where(self.constant_mask_, 1.0, std)
        self.stddevs_ = std
        return self

    def transform(self, X):
        self._check_fitted()
        X = check_array(X, dtype=float)
        return (X - self.means_) / self.stddevs_

    def inverse_transform(self, Z):
        self._check_fitted()
        Z = check_array(Z, dtype=float)
        return Z * self.stddevs_ + self.means_

    def stats(self) -> NormalizationStats:
        self._check_fitted()
        return NormalizationStats(tuple(self.means_), tuple(self.stddevs_))

    def _check_fitted(self):
        if not hasattr(self, "means_"):
            raise NotFittedError("ZScoreScaler is not fitted")


def normalize(dataset: Dataset) -> tuple[np.ndarray, NormalizationStats]:
    """z-score the full feature matrix; returns the matrix and the stats."""
    scaler = ZScoreScaler().fit(dataset.feature_matrix())
    return scaler.transform(dataset.feature_matrix()), scaler.stats()


def denormalize(Z: np.ndarray, stats: NormalizationStats) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    return Z * np.asarray(stats.stddevs) + np.asarray(stats.means)


# ---------------------------------------------------------------------------
# CSV I/O


def load_csv(path, n_inputs: int | None = None) -> Dataset:
    """Read a DMU table.

    The input/output split comes from ``n_inputs`` when given, otherwise from
    a ``#inputs=<m>`` directive line in the file.
    """
    path = Path(path)
    directive_inputs: int | None = None
    rows: list[tuple[int, list[str]]] = []  # (file line number, parsed fields)
    with path.open("r", encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                body = stripped.lstrip("#").strip()
                if body.replace(" ", "").startswith("inputs="):
                    directive_inputs = int(body.split("=", 1)[1])
                continue
            rows.append((lineno, next(csv.reader([stripped]))))
    if not rows:
        raise MalformedRowError(f"{path}: no header row")
    header = rows[0][1]
    if len(header) < 3 or header[0].lower() != "id":
        raise MalformedRowError(f"{path}: header must be id,<inputs...>,<outputs...>")
    m = n_inputs if n_inputs is not None else directive_inputs
    if m is None:
        raise MalformedRowError(
            f"{path}: input count unknown; pass n_inputs or add a '#inputs=<m>' line"
        )
    n_cols = len(header)
    if not 1 <= m <= n_cols - 2:
        raise MalformedRowError(f"{path}: n_inputs={m} leaves no output columns")
    input_names = tuple(header[1 : 1 + m])
    output_names = tuple(header[1 + m :])
    records = []
    for lineno, row in rows[1:]:
        if len(row) != n_cols:
            raise MalformedRowError(
                f"{path}:{lineno}: expected {n_cols} fields, got {len(row)}"
            )
        try:
            values = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise MalformedRowError(f"{path}:{lineno}: {exc}") from None
        records.append(
            BranchRecord(row[0], tuple(values[:m]), tuple(values[m:]))
        )
    return Dataset(input_names, output_names, tuple(records))


def write_csv(dataset: Dataset, path, seed: int | None = None) -> None:
    """Write a DMU table in the dialect :func:`load_csv` reads back.

    Floats are written with ``repr`` so a load/write round trip is identity
    field-for-field.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if seed is not None:
            fh.write(f"# seed={seed}\n")
        fh.write(f"#inputs={dataset.m}\n")
        writer = csv.writer(fh)
        writer.writerow(("id",) + dataset.feature_names)
        for rec in dataset.records:
            writer.writerow(
                (rec.id,) + tuple(repr(float(v)) for v in rec.inputs + rec.outputs)
            )


# ---------------------------------------------------------------------------
# Synthetic data


def apportion(n: int, proportions) -> list[int]:
    """Largest-remainder split of ``n`` into integer counts per proportion."""
    proportions = np.asarray(proportions, dtype=float)
    raw = proportions * n
    counts = np.floor(raw).astype(int)
    remainder = n - counts.sum()
    # ties broken by lowest cluster index
    order = np.argsort(-(raw - counts), kind="stable")
    for idx in order[:remainder]:
        counts[idx] += 1
    return counts.tolist()


def generate_synthetic(
    n: int,
    m: int,
    s: int,
    cluster_spec: list[tuple],
    seed: int,
) -> Dataset:
    """Draw a deterministic DMU table around per-cluster centers.

    ``cluster_spec`` is a list of ``(center, spread, proportion)`` where
    ``center`` is a scalar or an (m+s)-vector and ``spread`` the Gaussian
    sigma.  Records are emitted cluster by cluster with ids ``c<g>-<i>`` so
    ground-truth membership is recoverable.  Inputs are clamped strictly
    positive and outputs non-negative.
    """
    if n < 1 or m < 1 or s < 1:
        raise ValueError("n, m and s must all be >= 1")
    props = [p for _, _, p in cluster_spec]
    if abs(sum(props) - 1.0) > 1e-9:
        raise BadProportionsError(f"proportions sum to {sum(props)!r}, expected 1")
    if any(spread <= 0 for _, spread, _ in cluster_spec):
        raise ValueError("spreads must be > 0")
    d = m + s
    counts = apportion(n, props)
    rng = np.random.default_rng(seed)
    records = []
    row = 0
    for g, ((center, spread, _), count) in enumerate(zip(cluster_spec, counts)):
        center_vec = np.broadcast_to(np.asarray(center, dtype=float), (d,))
        block = rng.normal(loc=center_vec, scale=spread, size=(count, d))
        floor = max(1e-6, 0.01 * spread)
        block[:, :m] = np.maximum(block[:, :m], floor)
        block[:, m:] = np.maximum(block[:, m:], 0.0)
        # a record must keep at least one positive output
        dead = ~(block[:, m:] > 0).any(axis=1)
        block[dead, m] = floor
        for vals in block:
            records.append(
                BranchRecord(f"c{g}-{row:04d}", tuple(vals[:m]), tuple(vals[m:]))
            )
            row += 1
    input_names = tuple(f"I{i + 1}" for i in range(m))
    output_names = tuple(f"O{r + 1}" for r in range(s))
    return Dataset(input_names, output_names, tuple(records))


def default_cluster_spec(m: int, s: int) -> list[tuple]:
    """Three well-separated clusters with the stock 227/241/121 proportions."""
    d = m + s
    base = np.linspace(4.0, 10.0, d)
    return [
        (tuple(base * 1.0), 1.0, 227 / 589),
        (tuple(base * 2.5), 1.5, 241 / 589),
        (tuple(base * 5.0), 2.0, 121 / 589),
    ]
