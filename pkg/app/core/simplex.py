"""Dense two-phase simplex with Bland's rule.

Every variable is box-bounded, so the solver never meets an unbounded
problem: it either proves infeasibility in phase 1 or reaches an optimal
vertex in phase 2.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike

from app.core.constants import LP_MAX_PIVOTS, LP_TOLERANCE
from app.core.exceptions import LPCyclingError, StructuralError

logger = logging.getLogger(__name__)


class LPStatus(StrEnum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, eq=False)
class LPResult:
    status: LPStatus
    x: np.ndarray | None = None
    objective: float | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def _price(tableau: np.ndarray, basis: list[int], cost: np.ndarray) -> None:
    """Rewrite the objective row as reduced costs for the current basis."""
    m = len(basis)
    row = np.zeros(tableau.shape[1])
    row[: cost.size] = cost
    for i, j in enumerate(basis):
        if cost[j] != 0.0:
            row -= cost[j] * tableau[i]
    tableau[m] = row


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])


def _run(tableau: np.ndarray, basis: list[int], n_cols: int, tol: float) -> None:
    m = len(basis)
    for _ in range(LP_MAX_PIVOTS):
        reduced = tableau[m, :n_cols]
        entering = np.flatnonzero(reduced < -tol)
        if entering.size == 0:
            return
        col = int(entering[0])
        column = tableau[:m, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            raise StructuralError("LP is unbounded; all variables must be box-bounded")
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + tol * max(1.0, abs(best))]
        leave = min(tied, key=lambda r: basis[r])
        _pivot(tableau, int(leave), col)
        basis[int(leave)] = col
    logger.error(f"Simplex exceeded {LP_MAX_PIVOTS} pivots")
    raise LPCyclingError(f"simplex exceeded {LP_MAX_PIVOTS} pivots")


def _standard_form_solve(
    c: np.ndarray, A: np.ndarray, b: np.ndarray, tol: float
) -> np.ndarray | None:
    """Minimize c·w subject to A w ≤ b, w ≥ 0. Returns w or None if infeasible."""
    m, k = A.shape
    negative = np.flatnonzero(b < 0.0)
    n_art = negative.size
    n_cols = k + m + n_art
    tableau = np.zeros((m + 1, n_cols + 1))
    tableau[:m, :k] = A
    tableau[:m, k : k + m] = np.eye(m)
    tableau[:m, -1] = b
    basis = [k + i for i in range(m)]
    for slot, i in enumerate(negative):
        tableau[i, : k + m] *= -1.0
        tableau[i, -1] *= -1.0
        tableau[i, k + m + slot] = 1.0
        basis[i] = k + m + slot

    if n_art:
        phase_one = np.zeros(n_cols)
        phase_one[k + m :] = 1.0
        _price(tableau, basis, phase_one)
        _run(tableau, basis, n_cols, tol)
        residual = -tableau[m, -1]
        scale = max(1.0, float(np.abs(b).max(initial=0.0)))
        if residual > tol * scale * 10.0:
            return None
        # Drive zero-level artificials out of the basis; drop redundant rows.
        first_artificial = k + m
        for i in reversed(range(m)):
            if basis[i] < first_artificial:
                continue
            candidates = np.flatnonzero(np.abs(tableau[i, :first_artificial]) > tol)
            if candidates.size:
                _pivot(tableau, i, int(candidates[0]))
                basis[i] = int(candidates[0])
            else:
                tableau = np.delete(tableau, i, axis=0)
                del basis[i]
        n_cols = first_artificial
        tableau = np.hstack((tableau[:, :n_cols], tableau[:, -1:]))

    cost = np.zeros(n_cols)
    cost[:k] = c
    _price(tableau, basis, cost)
    _run(tableau, basis, n_cols, tol)

    solution = np.zeros(n_cols)
    solution[basis] = tableau[: len(basis), -1]
    return np.maximum(solution[:k], 0.0)


def lp_minimize(
    c: ArrayLike,
    A_ub: ArrayLike,
    b_ub: ArrayLike,
    lower: ArrayLike,
    upper: ArrayLike,
    tol: float = LP_TOLERANCE,
) -> LPResult:
    """Minimize c·v subject to A_ub v ≤ b_ub and lower ≤ v ≤ upper.

    Args:
        c: Objective coefficients, one per variable
        A_ub: Constraint matrix with one row per inequality (may have zero rows)
        b_ub: Right-hand sides
        lower: Finite lower bounds (scalar or per variable)
        upper: Finite upper bounds (scalar or per variable)
        tol: Pivot tolerance

    Returns:
        LPResult with status, minimizer and objective value

    Raises:
        StructuralError: If shapes disagree or a bound is not finite
        LPCyclingError: If the pivot limit is reached
    """
    c = np.asarray(c, dtype=float).ravel()
    k = c.size
    A = np.asarray(A_ub, dtype=float).reshape(-1, k) if k else np.zeros((len(np.atleast_1d(b_ub)), 0))
    b = np.asarray(b_ub, dtype=float).ravel()
    if A.shape[0] != b.size:
        raise StructuralError(f"A_ub has {A.shape[0]} rows but b_ub has {b.size} entries")
    lo = np.broadcast_to(np.asarray(lower, dtype=float), (k,)).copy()
    hi = np.broadcast_to(np.asarray(upper, dtype=float), (k,)).copy()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise StructuralError("every LP variable needs finite bounds")
    if np.any(lo > hi):
        return LPResult(status=LPStatus.INFEASIBLE)

    if k == 0:
        if np.all(b >= -tol):
            return LPResult(status=LPStatus.OPTIMAL, x=np.zeros(0), objective=0.0)
        return LPResult(status=LPStatus.INFEASIBLE)

    # Shift to w = v - lower so that 0 ≤ w ≤ upper - lower.
    rows = np.vstack((A, np.eye(k)))
    rhs = np.concatenate((b - A @ lo, hi - lo))
    w = _standard_form_solve(c, rows, rhs, tol)
    if w is None:
        return LPResult(status=LPStatus.INFEASIBLE)
    x = np.clip(lo + w, lo, hi)
    return LPResult(status=LPStatus.OPTIMAL, x=x, objective=float(c @ x))


def lp_feasible(
    constraints: Sequence[tuple[ArrayLike, float]],
    box: float,
    dim: int | None = None,
    tol: float = LP_TOLERANCE,
) -> np.ndarray | None:
    """Find a point of {y : ⟨g, y⟩ ≤ c for every (g, c)} ∩ [-box, box]^dim.

    Args:
        constraints: Halfspaces as (normal, offset) pairs
        box: Half-width of the bounding box
        dim: Dimension; required when constraints is empty
        tol: Pivot tolerance

    Returns:
        A feasible point, or None if the system is empty
    """
    if dim is None:
        if not constraints:
            raise StructuralError("dim is required when no constraints are given")
        dim = np.asarray(constraints[0][0]).size
    if constraints:
        A = np.array([np.asarray(g, dtype=float).ravel() for g, _ in constraints]).reshape(-1, dim)
        b = np.array([float(c) for _, c in constraints])
    else:
        A = np.zeros((0, dim))
        b = np.zeros(0)
    result = lp_minimize(np.zeros(dim), A, b, -box, box, tol=tol)
    return result.x if result.is_optimal else None
