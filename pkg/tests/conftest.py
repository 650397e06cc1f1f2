"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from deakit.dataset import BranchRecord, Dataset


def make_dataset(inputs, outputs, ids=None) -> Dataset:
    """Dataset from raw matrices; names default to I1.. / O1..."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    outputs = np.atleast_2d(np.asarray(outputs, dtype=float))
    n, m = inputs.shape
    s = outputs.shape[1]
    if ids is None:
        ids = [f"d{i}" for i in range(n)]
    records = tuple(
        BranchRecord(ids[i], tuple(inputs[i]), tuple(outputs[i])) for i in range(n)
    )
    return Dataset(
        tuple(f"I{j + 1}" for j in range(m)),
        tuple(f"O{r + 1}" for r in range(s)),
        records,
    )


def random_dea_dataset(rng, n, m, s) -> Dataset:
    return make_dataset(
        rng.uniform(1.0, 10.0, size=(n, m)), rng.uniform(1.0, 10.0, size=(n, s))
    )


def block_design_dataset(seed=0, n=400, within=0.9, shift=100.0, scale=5.0) -> Dataset:
    """Six variables in three positively correlated blocks.

    Feature order is I1 I2 I3 O1 O2 O3; the blocks pair (I3, O2), (I1, O1)
    and (I2, O3), i.e. column indices {2, 4}, {0, 3}, {1, 5}.  ``within``
    sets the expected within-block correlation; cross-block correlation is
    driven only by sampling noise.
    """
    rng = np.random.default_rng(seed)
    noise_sigma = np.sqrt(1.0 / within - 1.0)
    factors = rng.normal(size=(n, 3))
    raw = np.empty((n, 6))
    blocks = ((2, 4), (0, 3), (1, 5))
    for f, cols in enumerate(blocks):
        for col in cols:
            raw[:, col] = factors[:, f] + noise_sigma * rng.normal(size=n)
    values = shift + scale * raw
    assert (values > 0).all()
    return make_dataset(values[:, :3], values[:, 3:])


def piecewise_dataset(seed=0, per_blob=150):
    """Three distant blobs whose class rule flips orientation per blob.

    Within each blob the label depends linearly on the second feature, but
    the comparison direction alternates (above / below / above the blob
    center), so one global low-order polynomial cannot satisfy all three
    while per-blob models can.  Returns (Dataset, labels).
    """
    rng = np.random.default_rng(seed)
    centers = (40.0, 160.0, 280.0)
    orientations = (1.0, -1.0, 1.0)
    rows = []
    labels = []
    for center, orient in zip(centers, orientations):
        f1 = center + rng.normal(scale=2.0, size=per_blob)
        f2 = 50.0 + rng.uniform(-20.0, 20.0, size=per_blob)
        f3 = 50.0 + rng.normal(scale=2.0, size=per_blob)
        f4 = 50.0 + rng.normal(scale=2.0, size=per_blob)
        rows.append(np.column_stack([f1, f2, f3, f4]))
        labels.extend("pos" if orient * (v - 50.0) > 0 else "neg" for v in f2)
    values = np.vstack(rows)
    dataset = make_dataset(values[:, :2], values[:, 2:])
    return dataset, np.array(labels)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


# ---------------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL line per criterion in the run summary


def pytest_collection_modifyitems(config, items):
    docs = {}
    for item in items:
        if "test_acceptance.py::" in item.nodeid and item.function.__doc__:
            docs[item.nodeid] = item.function.__doc__.strip().splitlines()[0]
    config._acceptance_docs = docs


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    docs = getattr(config, "_acceptance_docs", {})
    if not docs:
        return
    outcomes = {}
    for rep in terminalreporter.stats.get("passed", []):
        if rep.nodeid in docs:
            outcomes[rep.nodeid] = "PASS"
    for status in ("failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            if rep.nodeid in docs:
                outcomes[rep.nodeid] = "FAIL"
    if not outcomes:
        return

    def criterion_order(nodeid):
        head = docs[nodeid].split(":", 1)[0]
        digits = "".join(ch for ch in head if ch.isdigit())
        return (int(digits) if digits else 0, docs[nodeid])

    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(outcomes, key=criterion_order):
        terminalreporter.write_line(f"{outcomes[nodeid]}  {docs[nodeid]}")
