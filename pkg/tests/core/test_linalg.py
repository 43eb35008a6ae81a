"""
Tests for the Cholesky-based inverse and its helpers.
"""

import numpy as np
import pytest

from ddalpha.core.linalg import (
    quadratic_form,
    ridge_regularize,
    robust_spd_inverse,
    spd_inverse,
)
from ddalpha.errors import DegenerateData, NotPositiveDefinite


class TestSpdInverse:

    def test_identity(self):
        np.testing.assert_allclose(spd_inverse(np.eye(3)), np.eye(3), atol=1e-15)

    def test_diagonal(self):
        np.testing.assert_allclose(spd_inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]), atol=1e-15)

    def test_two_by_two(self):
        expected = np.array([[4.0, -1.0], [-1.0, 1.0]]) / 3.0
        np.testing.assert_allclose(spd_inverse([[1.0, 1.0], [1.0, 4.0]]), expected, atol=1e-12)

    def test_product_is_identity(self, rng):
        b = rng.standard_normal((5, 5))
        m = b @ b.T + 5.0 * np.eye(5)
        np.testing.assert_allclose(m @ spd_inverse(m), np.eye(5), atol=1e-8)

    def test_indefinite_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            spd_inverse([[1.0, 2.0], [2.0, 1.0]])

    def test_singular_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            spd_inverse([[1.0, 1.0], [1.0, 1.0]])

    def test_asymmetric_rejected(self):
        with pytest.raises(NotPositiveDefinite, match="symmetric"):
            spd_inverse([[1.0, 0.5], [0.0, 1.0]])


class TestRegularization:

    def test_robust_inverse_of_singular_scatter(self):
        inverse = robust_spd_inverse(np.array([[1.0, 1.0], [1.0, 1.0]]))
        assert np.all(np.isfinite(inverse))

    def test_zero_trace(self):
        with pytest.raises(DegenerateData):
            ridge_regularize(np.zeros((2, 2)))

    def test_ridge_size(self):
        sigma = np.diag([2.0, 4.0])
        np.testing.assert_allclose(ridge_regularize(sigma) - sigma, 3e-8 * np.eye(2))


def test_quadratic_form_rows():
    diff = np.array([[1.0, 0.0], [1.0, 1.0]])
    precision = np.array([[2.0, 0.0], [0.0, 3.0]])
    np.testing.assert_allclose(quadratic_form(diff, precision), [2.0, 5.0])
