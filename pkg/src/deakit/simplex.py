"""Dense two-phase simplex solver for small linear programs.

Variables are non-negative unless flagged free (free variables are split
into positive and negative parts internally).  Instances here are tiny
(a few constraints, up to a few hundred columns), so the solver favors
a plain dense tableau over sparsity or revised-simplex machinery.

Pivoting uses Dantzig's rule with an automatic switch to Bland's rule after
an iteration threshold, which guarantees termination on degenerate
instances; ``bland=True`` forces Bland's rule from the start.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DimensionMismatchError, SolverFailureError

# reduced cost below -RC_TOL counts as improving; pivot elements below
# PIVOT_TOL are treated as zero in the ratio test
RC_TOL = 1e-9
PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7

LE, GE, EQ = "<=", ">=", "="


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpSolution:
    objective: float
    variable_values: np.ndarray
    status: LpStatus


def solve_lp(
    objective_coeffs,
    constraint_matrix,
    relations,
    rhs,
    maximize: bool = False,
    free_vars=(),
    bland: bool = False,
    max_iter: int | None = None,
) -> LpSolution:
    """Solve ``min (or max) c.x  s.t.  A x <rel> b,  x >= 0`` (free vars exempt).

    Returns an :class:`LpSolution`; infeasibility and unboundedness are
    reported through ``status``, not raised.
    """
    c = np.asarray(objective_coeffs, dtype=float)
    A = np.atleast_2d(np.asarray(constraint_matrix, dtype=float))
    b = np.asarray(rhs, dtype=float)
    relations = list(relations)
    n_rows, n_vars = A.shape
    if c.shape != (n_vars,):
        raise DimensionMismatchError(
            f"objective has {c.shape[0]} coefficients for {n_vars} columns"
        )
    if b.shape != (n_rows,) or len(relations) != n_rows:
        raise DimensionMismatchError(
            f"constraint matrix is {n_rows}x{n_vars} but rhs/relations have "
            f"{b.shape[0]}/{len(relations)} entries"
        )
    if any(rel not in (LE, GE, EQ) for rel in relations):
        raise ValueError(f"relations must be one of {LE!r}, {GE!r}, {EQ!r}")
    free_vars = sorted(set(free_vars))
    if free_vars and (free_vars[0] < 0 or free_vars[-1] >= n_vars):
        raise DimensionMismatchError("free variable index out of range")

    status, x = _two_phase(
        -c if maximize else c, A, relations, b, free_vars, bland, max_iter
    )
    if status is not LpStatus.OPTIMAL:
        return LpSolution(np.nan, np.full(n_vars, np.nan), status)
    _check_feasible(A, relations, b, x)
    return LpSolution(float(c @ x), x, LpStatus.OPTIMAL)


def _two_phase(c, A, relations, b, free_vars, bland, max_iter):
    n_rows, n_vars = A.shape
    # split free variables into x+ - x-
    neg_cols = {v: n_vars + i for i, v in enumerate(free_vars)}
    n_struct = n_vars + len(free_vars)
    A_s = np.hstack([A, -A[:, free_vars]]) if free_vars else A.copy()
    c_s = np.concatenate([c, -c[free_vars]]) if free_vars else c.copy()

    # orient every row to have a non-negative rhs
    A_s = A_s.copy()
    b_s = b.astype(float).copy()
    rels = list(relations)
    for i in range(n_rows):
        if b_s[i] < 0:
            A_s[i] *= -1.0
            b_s[i] *= -1.0
            rels[i] = {LE: GE, GE: LE, EQ: EQ}[rels[i]]

    slack_rows = [i for i, r in enumerate(rels) if r == LE]
    surplus_rows = [i for i, r in enumerate(rels) if r == GE]
    art_rows = [i for i, r in enumerate(rels) if r in (GE, EQ)]
    n_slack = len(slack_rows)
    n_surp = len(surplus_rows)
    n_art = len(art_rows)
    slack0 = n_struct
    surp0 = slack0 + n_slack
    art0 = surp0 + n_surp
    n_total = art0 + n_art

    T = np.zeros((n_rows, n_total + 1))
    T[:, :n_struct] = A_s
    T[:, -1] = b_s
    basis = np.empty(n_rows, dtype=int)
    for k, i in enumerate(slack_rows):
        T[i, slack0 + k] = 1.0
        basis[i] = slack0 + k
    for k, i in enumerate(surplus_rows):
        T[i, surp0 + k] = -1.0
    for k, i in enumerate(art_rows):
        T[i, art0 + k] = 1.0
        basis[i] = art0 + k

    if max_iter is None:
        max_iter = 2000 + 200 * (n_rows + n_total)
    switch_at = 0 if bland else 500 + 20 * (n_rows + n_total)

    if n_art:
        # phase 1: minimize the artificial sum
        c1 = np.zeros(n_total)
        c1[art0:] = 1.0
        obj = _reduced_cost_row(T, basis, c1)
        status = _iterate(T, basis, obj, None, switch_at, max_iter)
        if status is not LpStatus.OPTIMAL:
            # a phase-1 objective is bounded below by zero
            raise SolverFailureError("phase 1 did not reach optimality")
        if -obj[-1] > FEAS_TOL * (1.0 + abs(b_s).max(initial=0.0)):
            return LpStatus.INFEASIBLE, None
        _evict_artificials(T, basis, art0)

    banned = np.zeros(n_total, dtype=bool)
    banned[art0:] = True
    c2 = np.zeros(n_total)
    c2[:n_struct] = c_s
    obj = _reduced_cost_row(T, basis, c2)
    status = _iterate(T, basis, obj, banned, switch_at, max_iter)
    if status is not LpStatus.OPTIMAL:
        return status, None

    values = np.zeros(n_total)
    values[basis] = T[:, -1]
    x = values[:n_vars].copy()
    for v, col in neg_cols.items():
        x[v] -= values[col]
    return LpStatus.OPTIMAL, x


def _reduced_cost_row(T, basis, costs):
    obj = np.zeros(T.shape[1])
    obj[:-1] = costs
    for i, col in enumerate(basis):
        cb = costs[col]
        if cb != 0.0:
            obj -= cb * T[i]
    return obj


def _iterate(T, basis, obj, banned, switch_at, max_iter):
    n_rows = T.shape[0]
    for it in range(max_iter):
        use_bland = it >= switch_at
        col = _entering(obj, banned, use_bland)
        if col < 0:
            return LpStatus.OPTIMAL
        row = _leaving(T, basis, col)
        if row < 0:
            return LpStatus.UNBOUNDED
        _pivot(T, obj, basis, row, col)
    raise SolverFailureError(f"simplex did not terminate within {max_iter} iterations")


def _entering(obj, banned, use_bland) -> int:
    rc = obj[:-1]
    improving = rc < -RC_TOL
    if banned is not None:
        improving &= ~banned
    idx = np.flatnonzero(improving)
    if idx.size == 0:
        return -1
    if use_bland:
        return int(idx[0])
    return int(idx[np.argmin(rc[idx])])


def _leaving(T, basis, col) -> int:
    best = -1
    best_ratio = np.inf
    for i in range(T.shape[0]):
        a = T[i, col]
        if a > PIVOT_TOL:
            ratio = T[i, -1] / a
            # tie broken toward the smallest basis index (anti-cycling aid)
            if ratio < best_ratio - 1e-12 or (
                ratio < best_ratio + 1e-12 and (best < 0 or basis[i] < basis[best])
            ):
                best, best_ratio = i, ratio
    return best


def _pivot(T, obj, basis, row, col):
    T[row] /= T[row, col]
    piv_row = T[row]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * piv_row
    if obj[col] != 0.0:
        obj -= obj[col] * piv_row
    basis[row] = col


def _evict_artificials(T, basis, art0):
    """Pivot basic artificials (at value zero) out on any usable column."""
    for i in range(T.shape[0]):
        if basis[i] >= art0:
            cols = np.flatnonzero(np.abs(T[i, :art0]) > PIVOT_TOL)
            if cols.size:
                dummy = np.zeros(T.shape[1])
                _pivot(T, dummy, basis, i, int(cols[0]))
            # else: redundant row; harmless degenerate artificial stays basic


def _check_feasible(A, relations, b, x):
    lhs = A @ x
    scale = 1.0 + np.abs(b).max(initial=0.0)
    for i, rel in enumerate(relations):
        viol = {
            LE: lhs[i] - b[i],
            GE: b[i] - lhs[i],
            EQ: abs(lhs[i] - b[i]),
        }[rel]
        if viol > FEAS_TOL * scale:
            raise SolverFailureError(
                f"optimal solution violates constraint {i} by {viol:.3g}"
            )
