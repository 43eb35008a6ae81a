"""
Dense two-phase tableau simplex for problems in standard equality form

    minimize  c'x   subject to   A x = b,  x >= 0.

Pricing is Dantzig's most negative reduced cost; after ``2 * vars``
degenerate pivots the solver switches to Bland's smallest-index rule for the
rest of the phase, which guarantees termination. Ratio-test ties always go to
the basic variable with the smallest index, so identical input gives an
identical pivot sequence.

``solve_min_max_weight`` is the convex-weight problem behind zonoid depth.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from ddalpha.core.linalg import as_matrix, as_vector
from ddalpha.errors import NumericalBreakdown

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-12
FEASIBILITY_TOL = 1e-7
OPTIMALITY_TOL = 1e-9


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpProblem:
    """Standard-form LP; every variable is implicitly non-negative."""
    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray

    def __post_init__(self):
        objective = as_vector(self.objective, "objective")
        eq_matrix = as_matrix(self.eq_matrix, "eq_matrix")
        eq_rhs = as_vector(self.eq_rhs, "eq_rhs")
        if eq_matrix.shape[1] != objective.shape[0]:
            raise ValueError(
                f"eq_matrix has {eq_matrix.shape[1]} columns but objective has {objective.shape[0]} entries"
            )
        if eq_matrix.shape[0] != eq_rhs.shape[0]:
            raise ValueError(
                f"eq_matrix has {eq_matrix.shape[0]} rows but eq_rhs has {eq_rhs.shape[0]} entries"
            )
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "eq_matrix", eq_matrix)
        object.__setattr__(self, "eq_rhs", eq_rhs)

    @property
    def var_count(self) -> int:
        return self.objective.shape[0]


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    objective_value: float
    solution: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass(frozen=True)
class ConvexWeights:
    """Optimal convex weights of the min-max-weight problem."""
    value: float
    weights: np.ndarray


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    pivot_row = tableau[row] / tableau[row, col]
    column = tableau[:, col].copy()
    column[row] = 0.0
    tableau -= np.outer(column, pivot_row)
    tableau[row] = pivot_row
    # round-off can push basic values a hair below zero
    rhs = tableau[:-1, -1]
    rhs[(rhs < 0.0) & (rhs > -FEASIBILITY_TOL)] = 0.0


def _iterate(tableau: np.ndarray, basis: List[int], ncols: int) -> LpStatus:
    """Run simplex pivots on columns ``[0, ncols)`` until optimal or unbounded."""
    m = tableau.shape[0] - 1
    degenerate_limit = 2 * ncols
    max_iterations = 50 * (m + ncols) + 1000
    degenerate = 0
    bland = False

    for iteration in range(max_iterations):
        reduced = tableau[-1, :ncols]
        candidates = np.flatnonzero(reduced < -OPTIMALITY_TOL)
        if candidates.size == 0:
            return LpStatus.OPTIMAL
        if not bland:
            candidates = candidates[np.argsort(reduced[candidates], kind="stable")]

        entering = -1
        for col in candidates:
            column = tableau[:-1, col]
            if np.any(column > PIVOT_TOL):
                entering = int(col)
                break
            if not np.any(column > 0.0):
                # improving direction with no blocking row
                return LpStatus.UNBOUNDED
        if entering < 0:
            if bland:
                raise NumericalBreakdown(
                    f"no pivot above {PIVOT_TOL} after Bland-rule fallback (iteration {iteration})"
                )
            logger.debug("only tiny pivots available; switching to Bland's rule")
            bland = True
            continue

        column = tableau[:-1, entering]
        rows = np.flatnonzero(column > PIVOT_TOL)
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + OPTIMALITY_TOL * max(1.0, abs(best))]
        leaving = int(min(tied, key=lambda r: basis[r]))

        if best <= OPTIMALITY_TOL:
            degenerate += 1
            if not bland and degenerate > degenerate_limit:
                logger.debug("degenerate pivot limit reached; switching to Bland's rule")
                bland = True

        _pivot(tableau, leaving, entering)
        basis[leaving] = entering

    raise NumericalBreakdown(f"simplex did not terminate within {max_iterations} pivots")


def _crash_basis(a: np.ndarray) -> List[int]:
    """Pick unit columns (a single +1, zeros elsewhere) as the initial basis."""
    m, n = a.shape
    basis = [-1] * m
    nonzero = np.count_nonzero(a, axis=0)
    for j in np.flatnonzero(nonzero == 1):
        i = int(np.flatnonzero(a[:, j])[0])
        if basis[i] < 0 and a[i, j] == 1.0:
            basis[i] = int(j)
    return basis


def simplex_solve(problem: LpProblem) -> LpResult:
    """
    Solve a standard-form LP with the two-phase dense tableau method.

    Phase one only introduces artificial variables for rows that have no unit
    column; a residual artificial objective above 1e-7 means infeasible.

    Args:
        problem: The LP in standard equality form

    Returns:
        LpResult with status, objective value and (if optimal) the solution

    Raises:
        NumericalBreakdown: If no acceptable pivot exists after Bland fallback
    """
    a = problem.eq_matrix.copy()
    b = problem.eq_rhs.copy()
    c = problem.objective
    m, n = a.shape

    negative = b < 0
    a[negative] *= -1.0
    b[negative] *= -1.0

    basis = _crash_basis(a)
    missing = [i for i in range(m) if basis[i] < 0]
    n_art = len(missing)

    tableau = np.zeros((m + 1, n + n_art + 1))
    tableau[:m, :n] = a
    tableau[:m, -1] = b
    for k, i in enumerate(missing):
        tableau[i, n + k] = 1.0
        basis[i] = n + k

    if n_art:
        tableau[m, n:n + n_art] = 1.0
        for i in missing:
            tableau[m] -= tableau[i]
        _iterate(tableau, basis, n + n_art)
        residual = -tableau[m, -1]
        if residual > FEASIBILITY_TOL:
            logger.debug("phase one residual %.3e: infeasible", residual)
            return LpResult(LpStatus.INFEASIBLE, float("inf"))

        # drive remaining artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if basis[i] < n:
                keep.append(i)
                continue
            candidates = np.flatnonzero(np.abs(tableau[i, :n]) > PIVOT_TOL)
            if candidates.size:
                col = int(candidates[0])
                _pivot(tableau, i, col)
                basis[i] = col
                keep.append(i)
        if len(keep) < m:
            logger.debug("dropping %d redundant constraint row(s)", m - len(keep))
        rows = keep + [m]
        tableau = tableau[np.ix_(rows, list(range(n)) + [n + n_art])]
        basis = [basis[i] for i in keep]
        m = len(keep)
    else:
        tableau = tableau[:, list(range(n)) + [n + n_art]]

    # phase two: reduced costs of the original objective
    tableau[m, :] = 0.0
    tableau[m, :n] = c
    for i, j in enumerate(basis):
        if c[j] != 0.0:
            tableau[m] -= c[j] * tableau[i]

    status = _iterate(tableau, basis, n)
    if status is LpStatus.UNBOUNDED:
        return LpResult(LpStatus.UNBOUNDED, float("-inf"))

    solution = np.zeros(n)
    solution[basis] = tableau[:m, -1]
    return LpResult(LpStatus.OPTIMAL, float(c @ solution), solution)


def solve_min_max_weight(points, target) -> Optional[ConvexWeights]:
    """
    Minimize the largest convex weight needed to express ``target``.

    Solves  min t  s.t.  sum_i lam_i x_i = target,  sum_i lam_i = 1,
    lam_i <= t,  lam >= 0,  with slacks s_i turning ``lam_i <= t`` into
    ``lam_i - t + s_i = 0``.

    Args:
        points: (n, d) matrix of points x_i
        target: d-vector

    Returns:
        ConvexWeights with t* and the weights, or None if ``target`` lies
        outside the convex hull of ``points``
    """
    x = as_matrix(points, "points")
    z = as_vector(target, "target")
    n, d = x.shape
    if z.shape[0] != d:
        raise ValueError(f"target has dimension {z.shape[0]}, points have {d}")

    # variables: lam_1..lam_n, t, s_1..s_n
    nvars = 2 * n + 1
    eq = np.zeros((d + 1 + n, nvars))
    rhs = np.zeros(d + 1 + n)
    eq[:d, :n] = x.T
    rhs[:d] = z
    eq[d, :n] = 1.0
    rhs[d] = 1.0
    idx = np.arange(n)
    eq[d + 1 + idx, idx] = 1.0
    eq[d + 1:, n] = -1.0
    eq[d + 1 + idx, n + 1 + idx] = 1.0

    objective = np.zeros(nvars)
    objective[n] = 1.0

    result = simplex_solve(LpProblem(objective, eq, rhs))
    if result.status is LpStatus.INFEASIBLE:
        return None
    if result.status is LpStatus.UNBOUNDED:
        raise NumericalBreakdown("min-max-weight problem reported unbounded")
    return ConvexWeights(value=result.objective_value, weights=result.solution[:n].copy())
