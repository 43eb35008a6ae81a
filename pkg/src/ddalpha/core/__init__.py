"""
ddalpha numeric kernel.

Deterministic dense linear programming and linear algebra on which the
zonoid and Mahalanobis depth machinery is built.
"""

from ddalpha.core.linalg import spd_inverse
from ddalpha.core.simplex import (
    ConvexWeights,
    LpProblem,
    LpResult,
    LpStatus,
    simplex_solve,
    solve_min_max_weight,
)

__all__ = [
    'ConvexWeights',
    'LpProblem',
    'LpResult',
    'LpStatus',
    'simplex_solve',
    'solve_min_max_weight',
    'spd_inverse',
]
