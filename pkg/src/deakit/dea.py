"""Input-oriented CCR efficiency scoring.

Each DMU j0 gets the optimal value of

    min theta
    s.t.  sum_j lambda_j * x_ij <= theta * x_i,j0   (every input i)
          sum_j lambda_j * y_rj >= y_r,j0           (every output r)
          lambda >= 0, theta >= 0

solved on raw, un-normalized values (the radial measure is units-invariant).
``lambda = e_j0`` is always feasible with theta = 1, so the LP is optimal by
construction and theta lies in (0, 1].  Scores are then mapped to the three
performance bands via :class:`EfficiencyBins`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dataset import Dataset
from .exceptions import SolverFailureError, ThetaOutOfRangeError
from .simplex import GE, LE, LpStatus, solve_lp

# theta within this distance of 1 counts as efficient (simplex noise margin)
EFFICIENT_TOL = 1e-6
# intensity weights above this enter the reference set
LAMBDA_TOL = 1e-6


class PerformanceClass(Enum):
    WEAK = "Weak"
    AVERAGE = "Average"
    HIGH = "High"


@dataclass(frozen=True)
class EfficiencyBins:
    """Three right-open bands over [0, 1]; the last band is closed at 1.

    ``cut_points`` are the two interior boundaries; a boundary value belongs
    to the band on its right.
    """

    cut_points: tuple[float, float] = (0.55, 0.7)

    def __post_init__(self):
        lo, hi = self.cut_points
        if not (0.0 < lo < hi < 1.0):
            raise ValueError(
                f"cut points must satisfy 0 < a < b < 1, got {self.cut_points}"
            )

    @property
    def intervals(self) -> list[tuple[float, float]]:
        lo, hi = self.cut_points
        return [(0.0, lo), (lo, hi), (hi, 1.0)]

    def classify(self, theta: float) -> PerformanceClass:
        return assign_class(theta, self)


@dataclass
class EfficiencyScore:
    """DEA result for one DMU."""

    dmu_id: str
    theta: float
    lambdas: np.ndarray
    reference_set: tuple[str, ...]
    is_efficient: bool
    performance: PerformanceClass | None = field(default=None)


def _ccr_lp(inputs: np.ndarray, outputs: np.ndarray, j: int):
    """Objective, constraints and relations for DMU ``j``; vars = [theta, lambda]."""
    n, m = inputs.shape
    s = outputs.shape[1]
    c = np.zeros(n + 1)
    c[0] = 1.0
    A = np.zeros((m + s, n + 1))
    A[:m, 0] = -inputs[j]
    A[:m, 1:] = inputs.T
    A[m:, 1:] = outputs.T
    rels = [LE] * m + [GE] * s
    b = np.concatenate([np.zeros(m), outputs[j]])
    return c, A, rels, b


def ccr_input_efficiency(dataset: Dataset, j: int, bland: bool = False) -> EfficiencyScore:
    """Score DMU ``j`` (0-based index into the dataset's record order)."""
    if not 0 <= j < dataset.n:
        raise IndexError(f"DMU index {j} out of range for n={dataset.n}")
    inputs = dataset.input_matrix()
    outputs = dataset.output_matrix()
    sol = solve_lp(*_ccr_lp(inputs, outputs, j), bland=bland)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailureError(
            f"DMU {dataset.records[j].id!r}: LP returned {sol.status.value} "
            "(self-evaluation should always be feasible)"
        )
    theta = _clip_theta(float(sol.objective))
    lambdas = np.maximum(sol.variable_values[1:], 0.0)
    refs = tuple(
        dataset.records[k].id for k in np.flatnonzero(lambdas > LAMBDA_TOL)
    )
    return EfficiencyScore(
        dmu_id=dataset.records[j].id,
        theta=theta,
        lambdas=lambdas,
        reference_set=refs,
        is_efficient=theta >= 1.0 - EFFICIENT_TOL,
    )


def _clip_theta(value: float) -> float:
    """Snap roundoff-level overshoot back to the [0, 1] range.

    ``lambda = e_j`` makes theta = 1 feasible, so any value above 1 is pure
    floating-point noise; anything past the 1e-9 margin is left alone so a
    genuine solver fault still trips the downstream range check.
    """
    if 1.0 < value <= 1.0 + 1e-9:
        return 1.0
    if -1e-9 <= value < 0.0:
        return 0.0
    return value


def evaluate_all(dataset: Dataset, bins: EfficiencyBins | None = None) -> list[EfficiencyScore]:
    """Score every DMU, preserving record order.

    When ``bins`` is given each score also carries its performance band.
    """
    inputs = dataset.input_matrix()
    outputs = dataset.output_matrix()
    scores = []
    for j in range(dataset.n):
        try:
            sol = solve_lp(*_ccr_lp(inputs, outputs, j))
        except SolverFailureError as exc:
            raise SolverFailureError(
                f"DMU {dataset.records[j].id!r}: {exc}"
            ) from exc
        if sol.status is not LpStatus.OPTIMAL:
            raise SolverFailureError(
                f"DMU {dataset.records[j].id!r}: LP returned {sol.status.value}"
            )
        theta = _clip_theta(float(sol.objective))
        lambdas = np.maximum(sol.variable_values[1:], 0.0)
        refs = tuple(
            dataset.records[k].id for k in np.flatnonzero(lambdas > LAMBDA_TOL)
        )
        scores.append(
            EfficiencyScore(
                dmu_id=dataset.records[j].id,
                theta=theta,
                lambdas=lambdas,
                reference_set=refs,
                is_efficient=theta >= 1.0 - EFFICIENT_TOL,
                performance=assign_class(theta, bins) if bins is not None else None,
            )
        )
    return scores


def assign_class(theta: float, bins: EfficiencyBins) -> PerformanceClass:
    """Band containing ``theta``; boundaries belong to the right band, 1 to the last.

    Values within 1e-9 outside [0, 1] are treated as the nearest endpoint so
    simplex arithmetic noise cannot raise.
    """
    if theta < -1e-9 or theta > 1.0 + 1e-9:
        raise ThetaOutOfRangeError(f"theta={theta!r} outside [0, 1]")
    theta = min(max(theta, 0.0), 1.0)
    lo, hi = bins.cut_points
    if theta < lo:
        return PerformanceClass.WEAK
    if theta < hi:
        return PerformanceClass.AVERAGE
    return PerformanceClass.HIGH
