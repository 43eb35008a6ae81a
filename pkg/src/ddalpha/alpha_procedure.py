"""
The alpha-procedure in a polynomial extension of the depth space.

For one pair of classes (j, k) every depth vector is extended to the r basic
D-features, the monomials of total degree 1..p in the q depths. The
procedure then works stepwise in two-dimensional coordinate subspaces: it
finds the line through the origin that minimizes the average
misclassification rate (AMR) of the projected points, replaces the two
features by their projection onto the normal of that line, and continues
with the synthesized feature and one unused basic feature while the AMR
strictly decreases.

The synthesized direction is tracked as a weight vector over the basic
monomials, so the resulting separator is a closed-form polynomial in the
depths with no constant term.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb

from ddalpha.errors import DegenerateProjection, NoAdmissiblePair

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-12


@dataclass(frozen=True, order=True)
class Monomial:
    """Product of the q depths raised to ``exponents``."""
    exponents: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def evaluate(self, depths: np.ndarray) -> np.ndarray:
        """Value on one depth vector or on every row of a depth matrix."""
        values = np.atleast_2d(depths) ** np.asarray(self.exponents)
        return values.prod(axis=1)

    def label(self, names: Optional[Sequence[str]] = None) -> str:
        names = names or [f"D{m + 1}" for m in range(len(self.exponents))]
        parts = []
        for name, e in zip(names, self.exponents):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return "*".join(parts)


def monomials(q: int, p: int) -> Tuple[Monomial, ...]:
    """
    All monomials of total degree 1..p in q variables.

    Ordered by ascending total degree, then by exponent tuple with the first
    depth's exponent decreasing (D1 before D2, D1^2 before D1*D2 before D2^2).
    """
    if p < 1 or q < 1:
        raise ValueError(f"degree and class count must be >= 1, got p={p}, q={q}")
    terms = [
        exps for exps in itertools.product(range(p + 1), repeat=q)
        if 1 <= sum(exps) <= p
    ]
    terms.sort(key=lambda e: (sum(e), tuple(-v for v in e)))
    return tuple(Monomial(tuple(e)) for e in terms)


def feature_count(q: int, p: int) -> int:
    """r = C(p+q, q) - 1."""
    return int(comb(p + q, q, exact=True)) - 1


def expand(depths: np.ndarray, terms: Sequence[Monomial]) -> np.ndarray:
    """Matrix of basic D-features, one column per monomial."""
    depths = np.atleast_2d(np.asarray(depths, dtype=float))
    if not terms:
        return np.zeros((depths.shape[0], 0))
    return np.column_stack([term.evaluate(depths) for term in terms])


@dataclass
class FeatureMatrix:
    """
    Extended D-representation of the points of one class pair.

    ``first`` is True for points of class ``pair[0]`` and False for points of
    class ``pair[1]``. ``sizes`` are the training class sizes used to break
    zero scores; the tag counts stand in when they are not given.
    """
    values: np.ndarray
    monomials: Tuple[Monomial, ...]
    first: np.ndarray
    degree: int
    pair: Tuple[int, int]
    sizes: Optional[Tuple[int, int]] = None

    @property
    def ties_to_first(self) -> bool:
        """Whether a zero score votes for ``pair[0]``, as ``decide`` rules it."""
        sizes = self.sizes
        if sizes is None:
            sizes = (int(np.count_nonzero(self.first)), int(np.count_nonzero(~self.first)))
        return decide(0.0, sizes, self.pair) == self.pair[0]

    @property
    def r(self) -> int:
        return len(self.monomials)

    @property
    def size(self) -> int:
        return self.values.shape[0]


def extend_features(depth_vectors, labels, p: int, pair: Tuple[int, int],
                    sizes: Optional[Tuple[int, int]] = None) -> FeatureMatrix:
    """
    Build the basic D-features of the points belonging to ``pair``.

    Args:
        depth_vectors: (N, q) depth vectors, outsiders already excluded
        labels: class index per row; rows outside the pair are dropped
        p: maximal total degree
        pair: (j, k) class indices
        sizes: training sizes of classes j and k, when they differ from the
            row counts

    Returns:
        FeatureMatrix with r = C(p+q, q) - 1 columns
    """
    depths = np.atleast_2d(np.asarray(depth_vectors, dtype=float))
    labels = np.asarray(labels, dtype=int).reshape(-1)
    j, k = pair
    keep = (labels == j) | (labels == k)
    terms = monomials(depths.shape[1], p)
    values = expand(depths[keep], terms)
    return FeatureMatrix(
        values=values,
        monomials=terms,
        first=labels[keep] == j,
        degree=p,
        pair=(j, k),
        sizes=sizes,
    )


@dataclass(frozen=True)
class AngleResult:
    """Best separating angle in a 2-D feature subspace."""
    alpha: float
    amr: float
    minimizing_arc: Tuple[float, float]
    errors: int


def _errors_at(alpha: float, z1: np.ndarray, z2: np.ndarray, first: np.ndarray,
               ties_to_first: bool) -> int:
    projection = z1 * math.cos(alpha) + z2 * math.sin(alpha)
    wrong = (first & (projection < 0)) | (~first & (projection > 0))
    wrong |= (projection == 0) & (first != ties_to_first)
    return int(np.count_nonzero(wrong))


def best_angle(z1, z2, first, ties_to_first: Optional[bool] = None) -> AngleResult:
    """
    Exact minimizer of the AMR over angles of lines through the origin.

    A point at polar angle phi changes its error status only at
    phi +/- pi/2. The AMR is evaluated on every open arc between consecutive
    breakpoints, adjacent minimal arcs are merged (cyclically), and the
    midpoint of the longest merged arc is returned (ties: smallest start).

    Points of the first class err where z1 cos a + z2 sin a < 0, points of the
    second class where it is > 0. A zero projection is scored like a zero
    score in ``decide``: it goes to the larger class, the first one on equal
    counts. Only points at the origin project to zero inside an arc.

    Args:
        z1, z2: feature columns
        first: boolean class tags (True for the first class)
        ties_to_first: where zero projections go; defaults to the rule of
            ``decide`` applied to the tag counts

    Returns:
        AngleResult; the arc end may exceed 2 pi when the arc wraps

    Raises:
        DegenerateProjection: If every point lies at the origin
    """
    z1 = np.asarray(z1, dtype=float).reshape(-1)
    z2 = np.asarray(z2, dtype=float).reshape(-1)
    first = np.asarray(first, dtype=bool).reshape(-1)
    if not (z1.shape == z2.shape == first.shape):
        raise ValueError("feature columns and labels must have equal length")
    total = first.shape[0]
    if ties_to_first is None:
        ties_to_first = bool(np.count_nonzero(first) >= np.count_nonzero(~first))

    active = (z1 != 0.0) | (z2 != 0.0)
    if not np.any(active):
        raise DegenerateProjection("every point lies at the origin of the feature plane")

    phi = np.arctan2(z2[active], z1[active])
    tag = first[active]
    # crossing phi + pi/2 the projection turns negative, crossing phi - pi/2 positive
    to_negative = np.mod(phi + math.pi / 2.0, TWO_PI)
    to_positive = np.mod(phi - math.pi / 2.0, TWO_PI)
    angles = np.concatenate([to_negative, to_positive])
    deltas = np.concatenate([np.where(tag, 1, -1), np.where(tag, -1, 1)])

    order = np.argsort(angles, kind="stable")
    angles = angles[order]
    deltas = deltas[order]

    # merge numerically coincident breakpoints
    starts = np.concatenate([[True], np.diff(angles) > ANGLE_TOL])
    if angles.size > 1 and (angles[0] + TWO_PI - angles[-1]) <= ANGLE_TOL:
        # the last group wraps onto the first one
        wrap = np.flatnonzero(starts)[-1]
        angles = np.concatenate([angles[wrap:] - TWO_PI, angles[:wrap]])
        deltas = np.concatenate([deltas[wrap:], deltas[:wrap]])
        starts = np.concatenate([[True], np.diff(angles) > ANGLE_TOL])
    group = np.cumsum(starts) - 1
    breaks = angles[starts]
    change = np.bincount(group, weights=deltas).astype(int)

    m = breaks.shape[0]
    ends = np.concatenate([breaks[1:], [breaks[0] + TWO_PI]])
    lengths = ends - breaks
    # arc i runs from breaks[i] to ends[i]; the last arc wraps
    last_mid = (breaks[-1] + ends[-1]) / 2.0
    base = _errors_at(last_mid, z1, z2, first, ties_to_first)
    # every point toggles twice per turn, so the changes sum to zero
    errors = base + np.cumsum(change)

    best = int(errors.min())
    minimal = errors == best

    if np.all(minimal):
        arcs = [(float(breaks[0]), float(breaks[0] + TWO_PI))]
    else:
        arcs = []
        # rotate so that the scan starts right after a non-minimal arc
        pivot = int(np.flatnonzero(~minimal)[-1])
        idx = [(pivot + 1 + s) % m for s in range(m)]
        current = None
        for i in idx:
            if minimal[i]:
                start = breaks[i] if i > pivot or pivot == m - 1 else breaks[i] + TWO_PI
                if current is None:
                    current = [start, start + lengths[i]]
                else:
                    current[1] += lengths[i]
            elif current is not None:
                arcs.append((float(current[0]), float(current[1])))
                current = None
        if current is not None:
            arcs.append((float(current[0]), float(current[1])))

    def normalized(arc):
        start = math.fmod(arc[0], TWO_PI)
        if start < 0:
            start += TWO_PI
        return start, start + (arc[1] - arc[0])

    arcs = [normalized(a) for a in arcs]
    arcs.sort(key=lambda a: (-(round((a[1] - a[0]) / ANGLE_TOL) * ANGLE_TOL), a[0]))
    chosen = arcs[0]
    alpha = math.fmod((chosen[0] + chosen[1]) / 2.0, TWO_PI)

    return AngleResult(alpha=alpha, amr=best / total, minimizing_arc=chosen, errors=best)


@dataclass(frozen=True)
class StepRecord:
    """One accepted step: the two coupled features, the angle and the AMR after it."""
    features: Tuple[str, str]
    alpha: float
    amr: float


@dataclass
class Separator:
    """
    Polynomial rule sum_nu w_nu * m_nu(d) for one class pair.

    Positive values vote for ``pair[0]``, negative values for ``pair[1]``.
    """
    monomials: Tuple[Monomial, ...]
    weights: np.ndarray
    steps: List[StepRecord] = field(default_factory=list)
    degree: int = 1
    pair: Tuple[int, int] = (0, 1)

    @property
    def training_amr(self) -> float:
        return self.steps[-1].amr if self.steps else 1.0

    def scores(self, depth_vectors) -> np.ndarray:
        """Scores of every row of a depth matrix."""
        return expand(depth_vectors, self.monomials) @ self.weights

    def describe(self, names: Optional[Sequence[str]] = None) -> str:
        terms = []
        for term, w in zip(self.monomials, self.weights):
            if w != 0.0:
                terms.append(f"{w:+.6g}*{term.label(names)}")
        return " ".join(terms) if terms else "0"


def separator_eval(separator: Separator, depth_vector) -> float:
    """
    Signed score of one depth vector; positive votes for the pair's first class.
    """
    dv = np.asarray(depth_vector, dtype=float).reshape(1, -1)
    if dv.shape[1] != len(separator.monomials[0].exponents):
        raise ValueError(
            f"depth vector has {dv.shape[1]} components, separator expects "
            f"{len(separator.monomials[0].exponents)}"
        )
    return float(separator.scores(dv)[0])


def _admissible(a: Monomial, b: Monomial, pair: Tuple[int, int]) -> bool:
    j, k = pair
    return (a.exponents[j] + b.exponents[j]) > 0 and (a.exponents[k] + b.exponents[k]) > 0


def alpha_train(fm: FeatureMatrix, names: Optional[Sequence[str]] = None) -> Separator:
    """
    Run the alpha-procedure on the features of one class pair.

    Step 1 scans every admissible pair of basic features (exponents on both
    classes of the pair positive across the two monomials) and keeps the one
    with minimal AMR; ties go to the smaller summed degree, then to the
    lexicographically smaller index pair. Each later step couples the
    synthesized feature with every unused basic feature and is accepted only
    if the AMR strictly decreases.

    Args:
        fm: FeatureMatrix with at least one point of each class
        names: optional depth names for the step log

    Returns:
        Separator with weights over the basic monomials

    Raises:
        NoAdmissiblePair: If the pair constraint excludes every feature pair
    """
    if not np.any(fm.first) or np.all(fm.first):
        raise ValueError("feature matrix needs at least one point of each class")
    z = fm.values
    terms = fm.monomials
    r = len(terms)
    label = [t.label(names) for t in terms]
    ties = fm.ties_to_first

    best = None
    for a, b in itertools.combinations(range(r), 2):
        if not _admissible(terms[a], terms[b], fm.pair):
            continue
        try:
            result = best_angle(z[:, a], z[:, b], fm.first, ties)
        except DegenerateProjection:
            continue
        key = (result.errors, terms[a].degree + terms[b].degree, a, b)
        if best is None or key < best[0]:
            best = (key, result, a, b)
    if best is None:
        raise NoAdmissiblePair(f"no admissible feature pair for classes {fm.pair}")

    _, result, a, b = best
    weights = np.zeros(r)
    weights[a] = math.cos(result.alpha)
    weights[b] = math.sin(result.alpha)
    used = {a, b}
    steps = [StepRecord((label[a], label[b]), result.alpha, result.amr)]
    current_errors = result.errors
    logger.debug("alpha-procedure pair %s step 1: %s x %s, AMR %.6g",
                 fm.pair, label[a], label[b], result.amr)

    while len(used) < r and current_errors > 0:
        synthesized = z @ weights
        candidate = None
        for nu in range(r):
            if nu in used:
                continue
            try:
                result = best_angle(synthesized, z[:, nu], fm.first, ties)
            except DegenerateProjection:
                continue
            key = (result.errors, terms[nu].degree, nu)
            if candidate is None or key < candidate[0]:
                candidate = (key, result, nu)
        if candidate is None or candidate[1].errors >= current_errors:
            break
        _, result, nu = candidate
        weights = weights * math.cos(result.alpha)
        weights[nu] += math.sin(result.alpha)
        used.add(nu)
        current_errors = result.errors
        steps.append(StepRecord(("synthesized", label[nu]), result.alpha, result.amr))
        logger.debug("alpha-procedure pair %s step %d: adds %s, AMR %.6g",
                     fm.pair, len(steps), label[nu], result.amr)

    return Separator(monomials=terms, weights=weights, steps=steps, degree=fm.degree, pair=fm.pair)


def decide(score: float, sizes: Tuple[int, int], pair: Tuple[int, int]) -> int:
    """Class voted for by ``score``; exact zeros go to the larger class, then the smaller index."""
    if score > 0.0:
        return pair[0]
    if score < 0.0:
        return pair[1]
    j, k = pair
    if sizes[0] != sizes[1]:
        return j if sizes[0] > sizes[1] else k
    return min(j, k)


def select_degree(depth_vectors, labels, pair: Tuple[int, int],
                  candidates: Sequence[int] = (1, 2, 3), folds: int = 10,
                  seed: int = 0) -> int:
    """
    Choose the degree p by ``folds``-fold cross-validation of the pair's points.

    Returns:
        The candidate with the smallest mean validation AMR (ties: smaller p)
    """
    depths = np.atleast_2d(np.asarray(depth_vectors, dtype=float))
    labels = np.asarray(labels, dtype=int).reshape(-1)
    j, k = pair
    rows = np.flatnonzero((labels == j) | (labels == k))
    folds = max(2, min(folds, rows.shape[0]))
    rng = np.random.default_rng(seed)
    parts = np.array_split(rng.permutation(rows), folds)

    scores = []
    for p in sorted(candidates):
        errors = 0
        counted = 0
        for part in parts:
            train = np.setdiff1d(rows, part)
            fm = extend_features(depths[train], labels[train], p, pair)
            if not np.any(fm.first) or np.all(fm.first):
                continue
            separator = alpha_train(fm)
            sizes = (int(np.count_nonzero(fm.first)), int(np.count_nonzero(~fm.first)))
            for row, value in zip(part, separator.scores(depths[part])):
                errors += decide(float(value), sizes, pair) != labels[row]
            counted += part.shape[0]
        amr = errors / counted if counted else 1.0
        logger.debug("degree %d cross-validated AMR %.6g for pair %s", p, amr, pair)
        scores.append((amr, p))
    return min(scores)[1]
