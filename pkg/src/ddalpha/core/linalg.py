"""
Dense linear-algebra helpers shared by the depth and outsider machinery.
"""

import logging

import numpy as np
from scipy import linalg as sla

from ddalpha.errors import DegenerateData, NotPositiveDefinite

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-12
SYMMETRY_TOL = 1e-9


def as_matrix(data, name: str = "matrix") -> np.ndarray:
    """Return ``data`` as a finite 2-D float array (a single vector becomes one row)."""
    m = np.asarray(data, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(x, name: str = "vector") -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def spd_inverse(m) -> np.ndarray:
    """
    Invert a symmetric positive definite matrix through its Cholesky factor.

    Args:
        m: Square symmetric matrix

    Returns:
        The inverse, symmetrized

    Raises:
        NotPositiveDefinite: If a factorization pivot is <= 1e-12
    """
    a = as_matrix(m, "matrix")
    if a.shape[0] != a.shape[1]:
        raise NotPositiveDefinite(f"matrix is not square: {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL * scale:
        raise NotPositiveDefinite("matrix is not symmetric")

    try:
        factor, lower = sla.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"Cholesky factorization failed: {e}")

    # squared diagonal of L are the pivots of the factorization
    pivots = np.diag(factor) ** 2
    if np.min(pivots) <= PIVOT_TOL:
        raise NotPositiveDefinite(f"factorization pivot {np.min(pivots):.3e} <= {PIVOT_TOL}")

    inverse = sla.cho_solve((factor, lower), np.eye(a.shape[0]), check_finite=False)
    return (inverse + inverse.T) / 2.0


def ridge_regularize(sigma: np.ndarray) -> np.ndarray:
    """
    Add the ridge ``1e-8 * trace / d`` to the diagonal of a scatter matrix.

    Raises:
        DegenerateData: If the trace is zero, i.e. every column is constant
    """
    d = sigma.shape[0]
    ridge = 1e-8 * float(np.trace(sigma)) / d
    if ridge <= 0.0:
        raise DegenerateData("scatter matrix has zero trace; every column is constant")
    logger.warning("regularizing singular scatter matrix", extra={"ridge": ridge})
    return sigma + ridge * np.eye(d)


def robust_spd_inverse(sigma: np.ndarray) -> np.ndarray:
    """``spd_inverse`` with one ridge-regularized retry for degenerate scatter."""
    try:
        return spd_inverse(sigma)
    except NotPositiveDefinite:
        return spd_inverse(ridge_regularize(as_matrix(sigma)))


def quadratic_form(diff: np.ndarray, precision: np.ndarray) -> np.ndarray:
    """Row-wise ``diff' P diff`` for a vector or a matrix of row vectors."""
    diff = np.atleast_2d(diff)
    return np.einsum("ij,jk,ik->i", diff, precision, diff)
