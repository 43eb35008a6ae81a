"""
Data depth functions and the depth transform.

The depth transform maps a point x of R^d to the vector of its depths with
respect to each of the q training classes, a point of [0, 1]^q. Zonoid depth
vanishes outside the convex hull of a class; a point whose depth vector is
all zero is an outsider. Mahalanobis depths are positive everywhere.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ddalpha.core.linalg import (
    as_matrix,
    as_vector,
    quadratic_form,
    robust_spd_inverse,
    spd_inverse,
)
from ddalpha.core.simplex import solve_min_max_weight
from ddalpha.errors import DegenerateData, TooFewPoints

logger = logging.getLogger(__name__)

DEPTH_CLAMP_TOL = 1e-9
MCD_RESTARTS = 500
MCD_MAX_CSTEPS = 200
MCD_CONVERGENCE = 1e-12


class DepthKind(str, Enum):
    """Depth used by the depth transform."""
    ZONOID = "zonoid"
    MAHALANOBIS_MOMENT = "mahal"
    MAHALANOBIS_MCD = "mahal-mcd"

    @property
    def is_mahalanobis(self) -> bool:
        return self is not DepthKind.ZONOID


@dataclass
class LabeledDataset:
    """
    d-variate points with class indices 0..q-1.

    ``class_names`` fixes q and the printable name of every class; class
    indices are positions in that tuple.
    """
    points: np.ndarray
    labels: np.ndarray
    class_names: Tuple[str, ...]

    def __post_init__(self):
        self.points = as_matrix(self.points, "points")
        self.labels = np.asarray(self.labels, dtype=int).reshape(-1)
        self.class_names = tuple(str(c) for c in self.class_names)
        if self.labels.shape[0] != self.points.shape[0]:
            raise ValueError(
                f"{self.points.shape[0]} points but {self.labels.shape[0]} labels"
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.q):
            raise ValueError(f"labels must lie in 0..{self.q - 1}")

    @classmethod
    def from_labels(cls, points, labels: Sequence[Hashable]) -> "LabeledDataset":
        """Build a dataset mapping arbitrary labels to indices by first appearance."""
        names: Dict[Hashable, int] = {}
        indices = []
        for label in labels:
            if label not in names:
                names[label] = len(names)
            indices.append(names[label])
        return cls(points, np.asarray(indices, dtype=int), tuple(str(k) for k in names))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def q(self) -> int:
        return len(self.class_names)

    @property
    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.q)

    @property
    def priors(self) -> np.ndarray:
        return self.class_sizes / float(self.n)

    def class_points(self, j: int) -> np.ndarray:
        return self.points[self.labels == j]

    def subset(self, indices) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=int)
        return LabeledDataset(self.points[indices], self.labels[indices], self.class_names)

    def check_trainable(self) -> None:
        """
        Raises:
            TooFewPoints: If some class has fewer than d+1 points
        """
        for j, size in enumerate(self.class_sizes):
            if size < self.d + 1:
                raise TooFewPoints(
                    f"class '{self.class_names[j]}' has {size} point(s), needs at least d+1 = {self.d + 1}",
                    class_name=self.class_names[j],
                )


@dataclass(frozen=True)
class LocationScatter:
    mu: np.ndarray
    sigma: np.ndarray

    def precision(self) -> np.ndarray:
        """Inverse scatter, ridge-regularized when the scatter is singular."""
        return robust_spd_inverse(self.sigma)


def is_outsider(depth_vector: np.ndarray) -> bool:
    """The all-zero depth vector is the outsider signature."""
    return not np.any(np.asarray(depth_vector) != 0.0)


def _clamp(depth: float) -> float:
    if depth < 0.0:
        if depth < -DEPTH_CLAMP_TOL:
            logger.debug("depth %.3e below clamp tolerance", depth)
        return 0.0
    if depth > 1.0:
        if depth > 1.0 + DEPTH_CLAMP_TOL:
            logger.debug("depth %.17g above clamp tolerance", depth)
        return 1.0
    return depth


def zonoid_depth(x, data) -> float:
    """
    Zonoid depth of ``x`` with respect to the rows of ``data``.

    Computed as 1 / (n t*) where t* is the smallest possible largest weight
    of a convex combination of the data points equal to ``x``.

    Returns:
        Depth in [0, 1]; 0 outside the convex hull
    """
    points = as_matrix(data, "data")
    z = as_vector(x, "x")
    n, d = points.shape
    if z.shape[0] != d:
        raise ValueError(f"point has dimension {z.shape[0]}, data has {d}")

    # outside the bounding box means outside the hull
    if np.any(z < points.min(axis=0)) or np.any(z > points.max(axis=0)):
        return 0.0

    weights = solve_min_max_weight(points, z)
    if weights is None:
        return 0.0
    return _clamp(1.0 / (n * weights.value))


def _mahalanobis_depth(x: np.ndarray, mu: np.ndarray, precision: np.ndarray) -> float:
    distance = float(quadratic_form(x - mu, precision)[0])
    return 1.0 / (1.0 + distance)


def mahalanobis_depth(x, ls: LocationScatter) -> float:
    """
    Mahalanobis depth 1 / (1 + (x - mu)' Sigma^-1 (x - mu)).

    Raises:
        NotPositiveDefinite: If ``ls.sigma`` cannot be inverted
    """
    z = as_vector(x, "x")
    return _mahalanobis_depth(z, as_vector(ls.mu), spd_inverse(ls.sigma))


def estimate_moments(data) -> LocationScatter:
    """
    Sample mean and sample covariance (divisor n-1).

    Raises:
        DegenerateData: Fewer than two points, or a covariance that is not
            positive semi-definite within tolerance
    """
    x = as_matrix(data, "data")
    if x.shape[0] < 2:
        raise DegenerateData(f"moment estimate needs at least 2 points, got {x.shape[0]}")
    mu = x.mean(axis=0)
    sigma = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    sigma = (sigma + sigma.T) / 2.0
    smallest = float(np.linalg.eigvalsh(sigma).min())
    if smallest < -1e-9 * max(1.0, float(np.trace(sigma))):
        raise DegenerateData(f"sample covariance has negative eigenvalue {smallest:.3e}")
    return LocationScatter(mu=mu, sigma=sigma)


def _subset_estimate(x: np.ndarray, subset: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    part = x[subset]
    mu = part.mean(axis=0)
    sigma = np.atleast_2d(np.cov(part, rowvar=False, ddof=1))
    sign, logdet = np.linalg.slogdet(sigma)
    return mu, sigma, (logdet if sign > 0 else -np.inf)


def _initial_subset(x: np.ndarray, rng: np.random.Generator) -> Optional[np.ndarray]:
    """A random (d+1)-subset, grown point by point until its covariance is nonsingular."""
    n, d = x.shape
    order = rng.permutation(n)
    size = d + 1
    while size <= n:
        subset = order[:size]
        _, _, logdet = _subset_estimate(x, subset)
        if np.isfinite(logdet):
            return subset
        size += 1
    return None


def _concentrate(x: np.ndarray, subset: np.ndarray, h: int):
    """C-steps from ``subset`` until the determinant stops decreasing."""
    mu, sigma, logdet = _subset_estimate(x, subset)
    for _ in range(MCD_MAX_CSTEPS):
        distances = quadratic_form(x - mu, np.linalg.inv(sigma))
        candidate = np.sort(np.argsort(distances, kind="stable")[:h])
        mu_new, sigma_new, logdet_new = _subset_estimate(x, candidate)
        if not np.isfinite(logdet_new):
            # exact fit: h points on a hyperplane
            return mu_new, sigma_new, -np.inf
        if logdet - logdet_new < MCD_CONVERGENCE:
            if logdet_new < logdet:
                mu, sigma, logdet = mu_new, sigma_new, logdet_new
            break
        mu, sigma, logdet = mu_new, sigma_new, logdet_new
    return mu, sigma, logdet


def estimate_mcd(data, seed: int, n_restarts: int = MCD_RESTARTS) -> LocationScatter:
    """
    Minimum covariance determinant estimate of location and scatter.

    Starts from ``n_restarts`` random (d+1)-subsets, refines each by C-steps
    to convergence over h = floor((n+d+1)/2) points, keeps the subset with the
    smallest determinant and rescales its scatter for consistency at the
    normal: Sigma * median(d_i^2) / chi2_d.ppf(0.5).

    Args:
        data: (n, d) matrix, n >= d+1
        seed: Seed of the restart stream
        n_restarts: Number of random initial subsets

    Raises:
        DegenerateData: If no subset has a nonsingular covariance
    """
    x = as_matrix(data, "data")
    n, d = x.shape
    if n < d + 1:
        raise DegenerateData(f"MCD needs at least d+1 = {d + 1} points, got {n}")
    h = (n + d + 1) // 2
    rng = np.random.default_rng(seed)

    best = None
    if h == n:
        best = _subset_estimate(x, np.arange(n))
    else:
        for restart in range(n_restarts):
            start = _initial_subset(x, rng)
            if start is None:
                continue
            estimate = _concentrate(x, start, h)
            if best is None or estimate[2] < best[2]:
                best = estimate
                logger.debug("MCD restart %d improved log-det to %.6g", restart, estimate[2])

    if best is None or not np.isfinite(best[2]):
        raise DegenerateData("MCD subset has a singular covariance matrix")

    mu, sigma, _ = best
    distances = quadratic_form(x - mu, np.linalg.inv(sigma))
    factor = float(np.median(distances)) / float(stats.chi2.ppf(0.5, d))
    return LocationScatter(mu=mu, sigma=sigma * factor)


def estimate_scatter(data, kind: DepthKind, seed: int = 0,
                     n_restarts: int = MCD_RESTARTS) -> LocationScatter:
    """Moment or MCD estimate, as selected by a Mahalanobis depth kind."""
    if kind is DepthKind.MAHALANOBIS_MCD:
        return estimate_mcd(data, seed, n_restarts)
    return estimate_moments(data)


@dataclass
class DepthSpace:
    """
    The fitted depth transform of one training set.

    Holds per-class training points and, for the Mahalanobis kinds, the
    precomputed class location and precision matrices.
    """
    kind: DepthKind
    class_points: List[np.ndarray]
    summaries: List[LocationScatter] = field(default_factory=list)
    _precisions: List[np.ndarray] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.kind.is_mahalanobis and not self._precisions:
            self._precisions = [ls.precision() for ls in self.summaries]

    @classmethod
    def fit(cls, ds: LabeledDataset, kind: DepthKind, seed: int = 0,
            mcd_restarts: int = MCD_RESTARTS) -> "DepthSpace":
        class_points = [ds.class_points(j) for j in range(ds.q)]
        summaries = []
        if kind.is_mahalanobis:
            summaries = [estimate_scatter(p, kind, seed, mcd_restarts) for p in class_points]
        return cls(kind=kind, class_points=class_points, summaries=summaries)

    @property
    def q(self) -> int:
        return len(self.class_points)

    def transform(self, x) -> np.ndarray:
        """Depth vector of a single point."""
        z = as_vector(x, "x")
        if self.kind is DepthKind.ZONOID:
            return np.array([zonoid_depth(z, p) for p in self.class_points])
        return np.array([
            _mahalanobis_depth(z, ls.mu, precision)
            for ls, precision in zip(self.summaries, self._precisions)
        ])

    def transform_many(self, points, threads: int = 0) -> np.ndarray:
        """Depth vectors of every row of ``points``; ``threads`` > 0 evaluates rows concurrently."""
        x = as_matrix(points, "points")
        if x.shape[0] == 0:
            return np.zeros((0, self.q))
        if threads > 0:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                rows = list(pool.map(self.transform, x))
        else:
            rows = [self.transform(row) for row in x]
        return np.vstack(rows)


def depth_transform(x, ds: LabeledDataset, kind: DepthKind,
                    space: Optional[DepthSpace] = None) -> np.ndarray:
    """
    Map ``x`` to (D_{X_1}(x), ..., D_{X_q}(x)).

    Args:
        x: d-vector
        ds: Training data; component j uses class j only
        kind: Depth to use
        space: Precomputed DepthSpace of ``ds`` (fitted here if omitted)

    Returns:
        DepthVector of q components in [0, 1]
    """
    if space is None:
        space = DepthSpace.fit(ds, kind)
    return space.transform(x)
