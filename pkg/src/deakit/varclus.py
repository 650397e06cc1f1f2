"""Agglomerative clustering of feature COLUMNS (not records).

Variables are grouped by magnitude of linear association: the distance
between two variables is ``1 - corr**2``, which pairs strongly correlated
variables regardless of sign.  Cutting the merge tree at k and checking the
per-variable R-squared diagnostics (own cluster vs. nearest other cluster)
guides the choice of k for the downstream record clustering.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .exceptions import KOutOfRangeError, TooFewRowsError

LINKAGES = ("average", "complete", "single")

# a squared correlation to the "next closest" cluster is capped just below 1
# so the (1 - R2) ratio stays finite
NEXT_R2_CAP = 1.0 - 1e-12
MEMBERSHIP_THRESHOLD = 0.7


@dataclass(frozen=True)
class Dendrogram:
    """Merge tree over variables.

    Leaves are numbered 0..p-1 in ``labels`` order; merge t creates node
    ``p + t``.  Heights are non-decreasing for the supported linkages.
    """

    merges: tuple[tuple[int, int, float], ...]
    labels: tuple[str, ...]

    @property
    def leaf_count(self) -> int:
        return len(self.labels)

    @property
    def heights(self) -> tuple[float, ...]:
        return tuple(h for _, _, h in self.merges)


@dataclass(frozen=True)
class VariableClusterStats:
    variable: str
    cluster: int
    own_r2: float
    next_r2: float
    one_minus_r2_ratio: float


@dataclass(frozen=True)
class ClusterCorrelationRow:
    variable: str
    membership_count: int
    correlations: tuple[float, ...]


def correlation_matrix(dataset: Dataset) -> np.ndarray:
    """Pearson correlations over all m+s feature columns.

    Constant columns correlate 0 with everything (with a warning); the
    diagonal is exactly 1 and entries are clipped to [-1, 1].
    """
    X = dataset.feature_matrix()
    if X.shape[0] < 3:
        raise TooFewRowsError("correlations need at least 3 rows")
    return _corr_columns(X)


def _corr_columns(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    std = X.std(axis=0, ddof=1)
    constant = std <= 0.0
    if constant.any():
        warnings.warn(
            "constant column(s) %s get correlation 0 with everything"
            % np.flatnonzero(constant).tolist(),
            stacklevel=2,
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(X, rowvar=False)
    corr = np.atleast_2d(corr)
    corr[constant, :] = 0.0
    corr[:, constant] = 0.0
    np.fill_diagonal(corr, 1.0)
    return np.clip(corr, -1.0, 1.0)


def agglomerate(corr: np.ndarray, linkage: str = "average", labels=None) -> Dendrogram:
    """Merge variables bottom-up under distance ``1 - corr**2``.

    Cluster-pair distances are recomputed from the leaf distance matrix at
    every step (mean / max / min over cross pairs); distance ties break on
    the lexicographically smallest (node_a, node_b) id pair.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"linkage must be one of {LINKAGES}, got {linkage!r}")
    corr = np.asarray(corr, dtype=float)
    p = corr.shape[0]
    if corr.shape != (p, p):
        raise ValueError("correlation matrix must be square")
    if labels is None:
        labels = tuple(f"v{i}" for i in range(p))
    labels = tuple(labels)
    if len(labels) != p:
        raise ValueError("label count does not match matrix size")
    dist = 1.0 - corr**2
    np.fill_diagonal(dist, 0.0)

    active: dict[int, list[int]] = {i: [i] for i in range(p)}
    merges: list[tuple[int, int, float]] = []
    next_id = p
    while len(active) > 1:
        ids = sorted(active)
        best_key = None
        for ai in range(len(ids)):
            for bi in range(ai + 1, len(ids)):
                ida, idb = ids[ai], ids[bi]
                sub = dist[np.ix_(active[ida], active[idb])]
                if linkage == "average":
                    d = float(sub.mean())
                elif linkage == "complete":
                    d = float(sub.max())
                else:
                    d = float(sub.min())
                key = (d, ida, idb)
                if best_key is None or key < best_key:
                    best_key = key
        d, ida, idb = best_key
        merges.append((ida, idb, d))
        active[next_id] = active.pop(ida) + active.pop(idb)
        next_id += 1
    return Dendrogram(tuple(merges), labels)


def cut(tree: Dendrogram, k: int) -> list[list[str]]:
    """Partition into k clusters by undoing the last k-1 merges.

    Clusters are ordered by their smallest leaf index; members are listed in
    leaf-index order.
    """
    p = tree.leaf_count
    if not 1 <= k <= p:
        raise KOutOfRangeError(f"k={k} outside [1, {p}]")
    groups: dict[int, list[int]] = {i: [i] for i in range(p)}
    for t, (a, b, _) in enumerate(tree.merges[: p - k]):
        groups[p + t] = groups.pop(a) + groups.pop(b)
    clusters = sorted((sorted(members) for members in groups.values()), key=min)
    return [[tree.labels[i] for i in members] for members in clusters]


def _columns(dataset: Dataset, names) -> list[int]:
    index = {name: i for i, name in enumerate(dataset.feature_names)}
    return [index[name] for name in names]


def _centroids(Z: np.ndarray, member_cols: list[list[int]]) -> np.ndarray:
    return np.column_stack([Z[:, cols].mean(axis=1) for cols in member_cols])


def _safe_corr(u: np.ndarray, v: np.ndarray) -> float:
    su, sv = u.std(ddof=1), v.std(ddof=1)
    if su <= 0.0 or sv <= 0.0:
        return 0.0
    c = float(np.corrcoef(u, v)[0, 1])
    return float(np.clip(c, -1.0, 1.0))


def cluster_stats(dataset: Dataset, partition: list[list[str]]) -> list[VariableClusterStats]:
    """R-squared of each variable with its own cluster centroid vs. the
    nearest other cluster's centroid.

    Centroids are means of z-scored member columns; singleton clusters give
    own_r2 = 1 by convention.
    """
    _check_partition(dataset, partition)
    X = dataset.feature_matrix()
    Z = _zscore(X)
    member_cols = [_columns(dataset, names) for names in partition]
    centroids = _centroids(Z, member_cols)
    out = []
    for g, names in enumerate(partition):
        for name, col in zip(names, member_cols[g]):
            if len(names) == 1:
                own = 1.0
            else:
                own = _safe_corr(X[:, col], centroids[:, g]) ** 2
            others = [
                _safe_corr(X[:, col], centroids[:, h]) ** 2
                for h in range(len(partition))
                if h != g
            ]
            nxt = max(others) if others else 0.0
            ratio = (1.0 - own) / (1.0 - min(nxt, NEXT_R2_CAP))
            out.append(VariableClusterStats(name, g, own, nxt, ratio))
    out.sort(key=lambda st: dataset.feature_names.index(st.variable))
    return out


def cluster_correlation_table(
    dataset: Dataset, partition: list[list[str]]
) -> list[ClusterCorrelationRow]:
    """Correlation of every variable with every cluster centroid.

    ``membership_count`` counts clusters with |correlation| above 0.7.
    """
    _check_partition(dataset, partition)
    X = dataset.feature_matrix()
    Z = _zscore(X)
    member_cols = [_columns(dataset, names) for names in partition]
    centroids = _centroids(Z, member_cols)
    rows = []
    for col, name in enumerate(dataset.feature_names):
        corrs = tuple(
            _safe_corr(X[:, col], centroids[:, g]) for g in range(len(partition))
        )
        count = sum(1 for c in corrs if abs(c) > MEMBERSHIP_THRESHOLD)
        rows.append(ClusterCorrelationRow(name, count, corrs))
    return rows


@dataclass(frozen=True)
class KSelection:
    k: int
    relative_gaps: dict[int, float]
    valid: dict[int, bool]
    warned: bool


def select_k(tree: Dendrogram, dataset: Dataset, k_max: int) -> KSelection:
    """Pick k in [2, min(k_max, p-1)] by the largest relative jump between
    the last kept merge height and the first undone one.

    Candidates are tried in decreasing gap order and must pass the validity
    screen (every one_minus_r2_ratio < 1 and every membership_count == 1);
    when none passes, the gap-maximizing k is returned with a warning.
    """
    p = tree.leaf_count
    if not 2 <= k_max <= p:
        raise KOutOfRangeError(f"k_max={k_max} outside [2, {p}]")
    heights = tree.heights
    candidates = range(2, min(k_max, p - 1) + 1)
    gaps: dict[int, float] = {}
    for k in candidates:
        kept = p - k
        h_low = heights[kept - 1] if kept >= 1 else 0.0
        gap = heights[kept] - h_low
        if h_low > 1e-12:
            gaps[k] = gap / h_low
        else:
            gaps[k] = np.inf if gap > 1e-12 else 0.0
    ordered = sorted(gaps, key=lambda k: (-gaps[k], k))
    valid: dict[int, bool] = {}
    for k in ordered:
        stats = cluster_stats(dataset, cut(tree, k))
        table = cluster_correlation_table(dataset, cut(tree, k))
        valid[k] = all(st.one_minus_r2_ratio < 1.0 for st in stats) and all(
            row.membership_count == 1 for row in table
        )
        if valid[k]:
            return KSelection(k, gaps, valid, warned=False)
    best = ordered[0]
    warnings.warn(
        f"no k in {list(candidates)} passes the R2/membership screen; "
        f"falling back to gap-maximizing k={best}",
        stacklevel=2,
    )
    return KSelection(best, gaps, valid, warned=True)


def dendrogram_to_dot(tree: Dendrogram) -> str:
    """GraphViz rendering of the merge tree (heights as edge labels)."""
    p = tree.leaf_count
    lines = ["digraph dendrogram {", "  rankdir=BT;"]
    for i, label in enumerate(tree.labels):
        lines.append(f'  n{i} [label="{label}" shape=box];')
    for t, (a, b, h) in enumerate(tree.merges):
        node = p + t
        lines.append(f'  n{node} [label="{h:.4f}" shape=point];')
        lines.append(f"  n{a} -> n{node};")
        lines.append(f"  n{b} -> n{node};")
    lines.append("}")
    return "\n".join(lines)


def _zscore(X: np.ndarray) -> np.ndarray:
    std = X.std(axis=0, ddof=1)
    std = np.where(std <= 0.0, 1.0, std)
    return (X - X.mean(axis=0)) / std


def _check_partition(dataset: Dataset, partition) -> None:
    flat = [name for names in partition for name in names]
    if sorted(flat) != sorted(dataset.feature_names):
        raise ValueError("partition must cover every variable exactly once")
