"""
The DD-alpha classifier.

Training maps every training point to its depth vector, separates every pair
of classes by the alpha-procedure in the extended depth space and fits what
the configured outsider treatment needs. A new point is assigned to the class
that wins most pairwise votes; points with an all-zero depth vector
(outsiders) are handed to the outsider treatment instead.
"""

import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from ddalpha.alpha_procedure import (
    Separator,
    alpha_train,
    decide,
    extend_features,
    select_degree,
    separator_eval,
)
from ddalpha.core.linalg import as_matrix, as_vector, quadratic_form, robust_spd_inverse
from ddalpha.depth import (
    MCD_RESTARTS,
    DepthKind,
    DepthSpace,
    LabeledDataset,
    LocationScatter,
    _mahalanobis_depth,
    estimate_mcd,
    estimate_moments,
    is_outsider,
)
from ddalpha.errors import ConfigError, SchemaMismatch, TooFewPoints

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class OutsiderKind(str, Enum):
    RANDOM = "random"
    KNN_EUCLID = "knn"
    KNN_MAHALANOBIS = "knn-mahal"
    MAX_MAHALANOBIS_DEPTH = "maxdepth"


class Estimator(str, Enum):
    MOMENT = "moment"
    MCD = "mcd"


@dataclass(frozen=True)
class OutsiderRule:
    """
    Treatment of points outside every class's convex hull.

    ``RANDOM`` draws a class with the training proportions; the k-NN kinds
    vote among the k nearest training points (Euclidean or pooled
    Mahalanobis metric); ``MAX_MAHALANOBIS_DEPTH`` picks the class of
    maximal Mahalanobis depth. ``estimator`` selects moment or MCD estimates
    for the Mahalanobis variants; ``seed`` overrides the model seed for the
    random draw.
    """
    kind: OutsiderKind = OutsiderKind.RANDOM
    k: int = 1
    estimator: Estimator = Estimator.MOMENT
    seed: Optional[int] = None

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")

    @classmethod
    def parse(cls, text: str, k: int = 1, seed: Optional[int] = None) -> "OutsiderRule":
        """
        Parse the command line spelling of a rule.

        Accepted: random, knn, knn-mahal, knn-mahal-mcd, maxdepth, maxdepth-mcd.
        """
        spelling = text.strip().lower()
        estimator = Estimator.MOMENT
        if spelling.endswith("-mcd"):
            estimator = Estimator.MCD
            spelling = spelling[:-len("-mcd")]
        try:
            kind = OutsiderKind(spelling)
        except ValueError:
            raise ConfigError(f"unknown outsider rule '{text}'")
        if estimator is Estimator.MCD and kind not in (
            OutsiderKind.KNN_MAHALANOBIS, OutsiderKind.MAX_MAHALANOBIS_DEPTH
        ):
            raise ConfigError(f"outsider rule '{text}' does not use a scatter estimate")
        return cls(kind=kind, k=k, estimator=estimator, seed=seed)

    @property
    def name(self) -> str:
        if self.kind in (OutsiderKind.KNN_MAHALANOBIS, OutsiderKind.MAX_MAHALANOBIS_DEPTH) \
                and self.estimator is Estimator.MCD:
            return f"{self.kind.value}-mcd"
        return self.kind.value

    @property
    def uses_scatter(self) -> bool:
        return self.kind in (OutsiderKind.KNN_MAHALANOBIS, OutsiderKind.MAX_MAHALANOBIS_DEPTH)

    @property
    def is_knn(self) -> bool:
        return self.kind in (OutsiderKind.KNN_EUCLID, OutsiderKind.KNN_MAHALANOBIS)


@dataclass
class ClassifierConfig:
    """Everything ``train`` needs besides the data."""
    depth_kind: DepthKind = DepthKind.ZONOID
    degree: int = 2
    outsider_rule: OutsiderRule = field(default_factory=OutsiderRule)
    seed: int = 0
    degree_cv: bool = False
    degree_candidates: Tuple[int, ...] = (1, 2, 3)
    cv_folds: int = 10
    knn_cv: bool = False
    knn_max_k: int = 10
    mcd_restarts: int = MCD_RESTARTS
    threads: int = 0

    def __post_init__(self):
        if self.degree < 1:
            raise ConfigError(f"degree must be >= 1, got {self.degree}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.threads < 0:
            raise ConfigError(f"threads must be >= 0, got {self.threads}")


@dataclass
class Prediction:
    label: int
    votes: np.ndarray
    depth_vector: np.ndarray
    outsider: bool


@dataclass
class Model:
    """
    A trained classifier. Immutable after ``train``.

    Keeps the training data (zonoid depth and the k-NN rules need it), one
    separator per unordered class pair, and the fitted outsider state.
    """
    points: np.ndarray
    labels: np.ndarray
    class_names: Tuple[str, ...]
    depth_kind: DepthKind
    degree: int
    outsider_rule: OutsiderRule
    seed: int
    separators: Dict[Tuple[int, int], Separator]
    depth_summaries: List[LocationScatter] = field(default_factory=list)
    outsider_scatter: List[LocationScatter] = field(default_factory=list)
    pooled_scatter: Optional[np.ndarray] = None
    version: int = FORMAT_VERSION

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=int)
        self.depth_space = DepthSpace(
            kind=self.depth_kind,
            class_points=[self.points[self.labels == j] for j in range(self.q)],
            summaries=list(self.depth_summaries),
        )
        self._outsider_precisions = [ls.precision() for ls in self.outsider_scatter]
        self._pooled_precision = (
            robust_spd_inverse(self.pooled_scatter) if self.pooled_scatter is not None else None
        )

    @property
    def q(self) -> int:
        return len(self.class_names)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.q)

    @property
    def priors(self) -> np.ndarray:
        return self.class_sizes / float(self.labels.shape[0])

    @property
    def random_seed(self) -> int:
        return self.outsider_rule.seed if self.outsider_rule.seed is not None else self.seed

    def dataset(self) -> LabeledDataset:
        return LabeledDataset(self.points, self.labels, self.class_names)

    def depth_vector(self, x) -> np.ndarray:
        return self.depth_space.transform(self._check_point(x))

    def _check_point(self, x) -> np.ndarray:
        z = as_vector(x, "x")
        if z.shape[0] != self.d:
            raise SchemaMismatch(f"point has {z.shape[0]} features, model expects {self.d}")
        return z


def _pooled_scatter(ds: LabeledDataset, estimator: Estimator, seed: int,
                    restarts: int) -> np.ndarray:
    """Scatter of all training points after centering every class at its own location."""
    centered = []
    for j in range(ds.q):
        part = ds.class_points(j)
        if estimator is Estimator.MCD:
            location = estimate_mcd(part, seed, restarts).mu
        else:
            location = part.mean(axis=0)
        centered.append(part - location)
    pooled = np.vstack(centered)
    if estimator is Estimator.MCD:
        return estimate_mcd(pooled, seed, restarts).sigma
    return pooled.T @ pooled / float(ds.n - ds.q)


def _knn_vote(neighbor_labels: np.ndarray, q: int) -> int:
    # ties go to the smaller class index
    return int(np.argmax(np.bincount(neighbor_labels, minlength=q)))


def _knn_distances(points: np.ndarray, x: np.ndarray, precision: Optional[np.ndarray]) -> np.ndarray:
    diff = points - x
    if precision is None:
        return np.einsum("ij,ij->i", diff, diff)
    return quadratic_form(diff, precision)


def _select_k(ds: LabeledDataset, precision: Optional[np.ndarray], max_k: int) -> int:
    """Leave-one-out choice of k for the k-NN outsider rules (ties: smaller k)."""
    max_k = max(1, min(max_k, ds.n - 1))
    errors = np.zeros(max_k, dtype=int)
    for i in range(ds.n):
        distances = _knn_distances(ds.points, ds.points[i], precision)
        distances[i] = np.inf
        order = np.argsort(distances, kind="stable")[:max_k]
        for k in range(1, max_k + 1):
            errors[k - 1] += _knn_vote(ds.labels[order[:k]], ds.q) != ds.labels[i]
    k = int(np.argmin(errors)) + 1
    logger.debug("leave-one-out k-NN errors %s, chose k=%d", errors.tolist(), k)
    return k


def train(ds: LabeledDataset, config: Optional[ClassifierConfig] = None) -> Model:
    """
    Train the DD-alpha classifier.

    Args:
        ds: Training data with q >= 2 classes of at least d+1 points each
        config: Depth kind, degree, outsider rule, seed and options

    Returns:
        The trained Model

    Raises:
        TooFewPoints: If q < 2 or a class has fewer than d+1 points
    """
    config = config or ClassifierConfig()
    if ds.q < 2:
        raise TooFewPoints(f"need at least two classes, got {ds.q}")
    ds.check_trainable()
    started = time.perf_counter()

    space = DepthSpace.fit(ds, config.depth_kind, config.seed, config.mcd_restarts)
    depths = space.transform_many(ds.points, threads=config.threads)
    inside = np.array([not is_outsider(row) for row in depths], dtype=bool)
    outsiders = int(np.count_nonzero(~inside))
    if outsiders:
        logger.warning("%d training point(s) have an all-zero depth vector", outsiders)
    sizes = ds.class_sizes

    separators: Dict[Tuple[int, int], Separator] = {}
    for pair in itertools.combinations(range(ds.q), 2):
        degree = config.degree
        if config.degree_cv:
            degree = select_degree(depths[inside], ds.labels[inside], pair, config.degree_candidates,
                                   config.cv_folds, config.seed)
        fm = extend_features(depths[inside], ds.labels[inside], degree, pair,
                             sizes=(int(sizes[pair[0]]), int(sizes[pair[1]])))
        separator = alpha_train(fm, names=ds.class_names)
        separators[pair] = separator
        logger.debug(
            "trained separator %s-%s: %s", ds.class_names[pair[0]], ds.class_names[pair[1]],
            separator.describe(ds.class_names),
            extra={"pair": list(pair), "degree": degree, "training_amr": separator.training_amr},
        )

    rule = config.outsider_rule
    outsider_scatter: List[LocationScatter] = []
    pooled = None
    if rule.kind is OutsiderKind.MAX_MAHALANOBIS_DEPTH:
        for j in range(ds.q):
            part = ds.class_points(j)
            if rule.estimator is Estimator.MCD:
                outsider_scatter.append(estimate_mcd(part, config.seed, config.mcd_restarts))
            else:
                outsider_scatter.append(estimate_moments(part))
    elif rule.kind is OutsiderKind.KNN_MAHALANOBIS:
        pooled = _pooled_scatter(ds, rule.estimator, config.seed, config.mcd_restarts)

    if rule.is_knn and config.knn_cv:
        precision = robust_spd_inverse(pooled) if pooled is not None else None
        rule = OutsiderRule(kind=rule.kind, k=_select_k(ds, precision, config.knn_max_k),
                            estimator=rule.estimator, seed=rule.seed)

    model = Model(
        points=ds.points.copy(),
        labels=ds.labels.copy(),
        class_names=ds.class_names,
        depth_kind=config.depth_kind,
        degree=config.degree,
        outsider_rule=rule,
        seed=config.seed,
        separators=separators,
        depth_summaries=list(space.summaries),
        outsider_scatter=outsider_scatter,
        pooled_scatter=pooled,
    )
    logger.info(
        "trained DD-alpha model",
        extra={"q": ds.q, "d": ds.d, "n": ds.n, "depth": config.depth_kind.value,
               "seconds": time.perf_counter() - started},
    )
    return model


def outsider_stream(seed: int, x: np.ndarray) -> np.random.Generator:
    """Random stream derived from the model seed and the bytes of the point."""
    words = np.frombuffer(np.ascontiguousarray(x, dtype=float).tobytes(), dtype=np.uint32)
    return np.random.default_rng([seed, *words.tolist()])


def classify_outsider(model: Model, x, rng: Optional[np.random.Generator] = None) -> int:
    """
    Assign an outsider with the model's outsider rule.

    Args:
        model: Trained model
        x: d-vector
        rng: Random stream for the random rule; derived from the model seed and
            ``x`` when omitted, so the draw is reproducible

    Returns:
        Class index
    """
    z = model._check_point(x)
    rule = model.outsider_rule

    if rule.kind is OutsiderKind.RANDOM:
        stream = rng if rng is not None else outsider_stream(model.random_seed, z)
        return int(stream.choice(model.q, p=model.priors))

    if rule.is_knn:
        precision = model._pooled_precision if rule.kind is OutsiderKind.KNN_MAHALANOBIS else None
        distances = _knn_distances(model.points, z, precision)
        # stable sort: equal distances keep training order
        order = np.argsort(distances, kind="stable")[:rule.k]
        return _knn_vote(model.labels[order], model.q)

    depths = [
        _mahalanobis_depth(z, ls.mu, precision)
        for ls, precision in zip(model.outsider_scatter, model._outsider_precisions)
    ]
    return int(np.argmax(depths))


def predict(model: Model, x, rng: Optional[np.random.Generator] = None) -> Prediction:
    """
    Classify one point by majority vote over the pairwise separators.

    Vote ties go to the tied class with the largest depth, then to the
    smaller index. All-zero depth vectors take the outsider path.
    """
    z = model._check_point(x)
    dv = model.depth_space.transform(z)
    votes = np.zeros(model.q, dtype=int)

    if is_outsider(dv):
        return Prediction(label=classify_outsider(model, z, rng), votes=votes,
                          depth_vector=dv, outsider=True)

    sizes = model.class_sizes
    for (j, k), separator in model.separators.items():
        winner = decide(separator_eval(separator, dv), (int(sizes[j]), int(sizes[k])), (j, k))
        votes[winner] += 1

    tied = np.flatnonzero(votes == votes.max())
    label = int(tied[0])
    if tied.shape[0] > 1:
        # argmax keeps the smaller index among equal depths
        label = int(tied[np.argmax(dv[tied])])
    return Prediction(label=label, votes=votes, depth_vector=dv, outsider=False)


def predict_many(model: Model, points, threads: int = 0) -> List[Prediction]:
    """``predict`` for every row; results do not depend on row order or threading."""
    x = as_matrix(points, "points")
    if threads > 0:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda row: predict(model, row), x))
    return [predict(model, row) for row in x]
