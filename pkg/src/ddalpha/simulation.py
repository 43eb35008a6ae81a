"""
Distributional settings and experiment protocols.

``setting(i)`` returns the i-th of the ten two-class benchmark settings
(normal, Cauchy, contaminated normal, exponential, asymmetric mixtures and a
normal-exponential pair). ``run_experiment`` repeats train-then-test on
fresh draws and collects the misclassification rates; ``run_timing``
measures the full train-plus-classify cycle over a grid of dimensions and
training sizes.

Every replication draws from its own random substream derived from
(seed, replication index), so results do not depend on execution order or
threading.
"""

import itertools
import logging
import math
import re
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from ddalpha.classifier import ClassifierConfig, predict, train
from ddalpha.depth import LabeledDataset
from ddalpha.errors import InvalidPlan, ReplicationFailed
from ddalpha.evaluation import amr, boxplot_stats
from ddalpha.log_setup import new_run_id

logger = logging.getLogger(__name__)

TIMING_TEST_PER_CLASS = 1250
DEFAULT_TIMING_GRID = tuple(itertools.product((5, 10, 15, 20), (200, 500, 1000)))


def _lower_factor(matrix) -> np.ndarray:
    sigma = np.atleast_2d(np.asarray(matrix, dtype=float))
    if not np.allclose(sigma, sigma.T):
        raise ValueError("scatter matrix must be symmetric")
    try:
        return linalg.cholesky(sigma, lower=True)
    except linalg.LinAlgError:
        raise ValueError("scatter matrix must be positive definite")


class DistributionSpec(ABC):
    """A d-variate distribution that can be sampled with an explicit stream."""

    @property
    @abstractmethod
    def dim(self) -> int:
        pass

    @abstractmethod
    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        pass

    def draw_tagged(self, n: int, rng: np.random.Generator,
                    training: bool = True) -> Tuple[np.ndarray, np.ndarray]:
        """Draws plus a flag per row marking contaminant points (never set here)."""
        return self.draw(n, rng), np.zeros(n, dtype=bool)


@dataclass(frozen=True)
class Normal(DistributionSpec):
    """N(mean, cov): mean + L z with L the lower Cholesky factor of cov."""
    mean: Tuple[float, ...]
    cov: Tuple[Tuple[float, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.mean)

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        factor = _lower_factor(self.cov)
        z = rng.standard_normal((n, self.dim))
        return np.asarray(self.mean, dtype=float) + z @ factor.T


@dataclass(frozen=True)
class SphericalNormal(DistributionSpec):
    """N(location, variance * I_d); ``shift_first_only`` moves only the first coordinate."""
    d: int
    location: float = 0.0
    variance: float = 1.0
    shift_first_only: bool = False

    @property
    def dim(self) -> int:
        return self.d

    @property
    def mean(self) -> np.ndarray:
        mean = np.zeros(self.d)
        if self.shift_first_only:
            mean[0] = self.location
        else:
            mean[:] = self.location
        return mean

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.mean + math.sqrt(self.variance) * rng.standard_normal((n, self.d))


@dataclass(frozen=True)
class Cauchy(DistributionSpec):
    """Elliptical Cauchy: loc + L z / |w| with z standard normal and w an independent scalar."""
    loc: Tuple[float, ...]
    scatter: Tuple[Tuple[float, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.loc)

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        factor = _lower_factor(self.scatter)
        z = rng.standard_normal((n, self.dim))
        w = np.abs(rng.standard_normal(n))
        return np.asarray(self.loc, dtype=float) + (z @ factor.T) / w[:, None]


@dataclass(frozen=True)
class ExpPair(DistributionSpec):
    """Independent exponential coordinates with the given rates, plus a shift."""
    rates: Tuple[float, ...]
    shift: Tuple[float, ...] = ()

    @property
    def dim(self) -> int:
        return len(self.rates)

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        rates = np.asarray(self.rates, dtype=float)
        shift = np.asarray(self.shift or (0.0,) * self.dim, dtype=float)
        # 1 - U lies in (0, 1]
        u = 1.0 - rng.random((n, self.dim))
        return -np.log(u) / rates + shift


@dataclass(frozen=True)
class MixNPair(DistributionSpec):
    """
    Independent MixN(mu, s1, s2) coordinates: mu - s1 |N(0,1)| or mu + s2 |N(0,1)|
    with probability 1/2 each. ``components`` holds (mu, s1, s2) per coordinate.
    """
    components: Tuple[Tuple[float, float, float], ...]

    @property
    def dim(self) -> int:
        return len(self.components)

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        params = np.asarray(self.components, dtype=float)
        mu, s1, s2 = params[:, 0], params[:, 1], params[:, 2]
        left = rng.random((n, self.dim)) < 0.5
        magnitude = np.abs(rng.standard_normal((n, self.dim)))
        return np.where(left, mu - s1 * magnitude, mu + s2 * magnitude)


@dataclass(frozen=True)
class ContaminatedNormal(DistributionSpec):
    """
    ``base`` with a fraction ``rate`` of the training draws replaced by ``contaminant``.

    Exactly round(rate * n) training points come from the contaminant, shuffled
    among the rest. With ``training_only`` set, test draws come from the clean
    base.
    """
    base: DistributionSpec
    contaminant: DistributionSpec
    rate: float = 0.1
    training_only: bool = True

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"contamination rate must lie in [0, 1], got {self.rate}")
        if self.base.dim != self.contaminant.dim:
            raise ValueError("base and contaminant dimensions differ")

    @property
    def dim(self) -> int:
        return self.base.dim

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.draw_tagged(n, rng, training=True)[0]

    def draw_tagged(self, n: int, rng: np.random.Generator,
                    training: bool = True) -> Tuple[np.ndarray, np.ndarray]:
        if self.training_only and not training:
            return self.base.draw(n, rng), np.zeros(n, dtype=bool)
        dirty = int(round(self.rate * n))
        points = np.vstack([self.base.draw(n - dirty, rng), self.contaminant.draw(dirty, rng)])
        tags = np.concatenate([np.zeros(n - dirty, dtype=bool), np.ones(dirty, dtype=bool)])
        order = rng.permutation(n)
        return points[order], tags[order]


def sample(spec: DistributionSpec, n: int, rng: np.random.Generator,
           training: bool = True) -> np.ndarray:
    """
    Draw ``n`` i.i.d. points of ``spec``.

    ``training`` selects the learning-sample variant of contaminated settings.
    """
    if n < 1:
        raise InvalidPlan(f"sample size must be >= 1, got {n}")
    return spec.draw_tagged(n, rng, training=training)[0]


@dataclass(frozen=True)
class SettingPair:
    first: DistributionSpec
    second: DistributionSpec
    name: str = ""

    def __post_init__(self):
        if self.first.dim != self.second.dim:
            raise ValueError("both classes must live in the same dimension")

    @property
    def dim(self) -> int:
        return self.first.dim


_SIGMA = ((1.0, 1.0), (1.0, 4.0))
_SIGMA_WIDE = ((4.0, 4.0), (4.0, 16.0))
_ORIGIN = (0.0, 0.0)
_ONES = (1.0, 1.0)


def setting(number: int) -> SettingPair:
    """
    The ten two-class benchmark settings (both classes bivariate).

    1-2 normal location / location-scale, 3-4 Cauchy location / location-scale,
    5-6 the normal settings with 10% of the first class's learning sample
    drawn from N((10, 10), Sigma), 7-8 exponential location / location-scale,
    9 asymmetric MixN location, 10 normal versus exponential.
    """
    normal_location = SettingPair(Normal(_ORIGIN, _SIGMA), Normal(_ONES, _SIGMA))
    normal_scale = SettingPair(Normal(_ORIGIN, _SIGMA), Normal(_ONES, _SIGMA_WIDE))
    contaminant = Normal((10.0, 10.0), _SIGMA)

    catalogue = {
        1: ("normal location", normal_location),
        2: ("normal location-scale", normal_scale),
        3: ("Cauchy location", SettingPair(Cauchy(_ORIGIN, _SIGMA), Cauchy(_ONES, _SIGMA))),
        4: ("Cauchy location-scale", SettingPair(Cauchy(_ORIGIN, _SIGMA), Cauchy(_ONES, _SIGMA_WIDE))),
        5: ("contaminated normal location", SettingPair(
            ContaminatedNormal(normal_location.first, contaminant), normal_location.second)),
        6: ("contaminated normal location-scale", SettingPair(
            ContaminatedNormal(normal_scale.first, contaminant), normal_scale.second)),
        7: ("exponential location", SettingPair(
            ExpPair((1.0, 1.0)), ExpPair((1.0, 1.0), (1.0, 1.0)))),
        8: ("exponential location-scale", SettingPair(
            ExpPair((1.0, 0.5)), ExpPair((0.5, 1.0), (1.0, 1.0)))),
        9: ("asymmetric location", SettingPair(
            MixNPair(((0.0, 1.0, 2.0), (0.0, 1.0, 4.0))),
            MixNPair(((1.0, 1.0, 2.0), (1.0, 1.0, 4.0))))),
        10: ("normal-exponential", SettingPair(
            Normal(_ORIGIN, ((1.0, 0.0), (0.0, 1.0))), ExpPair((1.0, 1.0)))),
    }
    if number not in catalogue:
        raise InvalidPlan(f"setting must be 1..10, got {number}")
    name, pair = catalogue[number]
    return SettingPair(pair.first, pair.second, name=f"{number}: {name}")


def timing_setting(kind: str, d: int) -> SettingPair:
    """
    Normal pairs of the timing study.

    ``location``: N(0_d, I_d) versus N(0.25 * 1_d, I_d).
    ``location-scale``: N(0_d, I_d) versus N((0.25, 0, ..., 0), 5 I_d).
    """
    if d < 1:
        raise InvalidPlan(f"dimension must be >= 1, got {d}")
    if kind == "location":
        return SettingPair(SphericalNormal(d), SphericalNormal(d, location=0.25), name=f"location d={d}")
    if kind == "location-scale":
        return SettingPair(
            SphericalNormal(d),
            SphericalNormal(d, location=0.25, variance=5.0, shift_first_only=True),
            name=f"location-scale d={d}",
        )
    raise InvalidPlan(f"unknown timing setting '{kind}'")


@dataclass
class ExperimentPlan:
    """
    Protocol of a simulation run: ``replications`` times, train on
    ``n_train`` points per class and test on ``n_test`` fresh points per class.

    ``pair`` replaces the numbered setting when given.
    """
    setting: Optional[int] = 1
    n_train: int = 200
    n_test: int = 500
    replications: int = 100
    seed: int = 0
    pair: Optional[SettingPair] = None

    def __post_init__(self):
        for name in ("n_train", "n_test", "replications"):
            value = getattr(self, name)
            if value <= 0:
                raise InvalidPlan(f"{name} must be positive, got {value}")
        if self.seed < 0:
            raise InvalidPlan(f"seed must be non-negative, got {self.seed}")
        if self.pair is None and (self.setting is None or not 1 <= self.setting <= 10):
            raise InvalidPlan(f"setting must be 1..10, got {self.setting}")

    def resolve_pair(self) -> SettingPair:
        return self.pair if self.pair is not None else setting(self.setting)

    @property
    def label(self) -> str:
        return str(self.setting) if self.pair is None else (self.pair.name or "custom")


def replication_stream(seed: int, replication: int) -> np.random.Generator:
    """Independent substream of ``seed`` for one replication (PCG64, spawn key)."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(replication,)))
    )


def draw_two_class(pair: SettingPair, per_class: int, rng: np.random.Generator,
                   training: bool) -> LabeledDataset:
    first = sample(pair.first, per_class, rng, training=training)
    second = sample(pair.second, per_class, rng, training=training)
    labels = np.repeat([0, 1], per_class)
    return LabeledDataset(np.vstack([first, second]), labels, ("1", "2"))


@dataclass
class AmrSample:
    """Misclassification rates of every replication of one experiment."""
    values: np.ndarray
    setting: str = ""
    seed: int = 0

    def summary(self) -> Dict[str, float]:
        low, q1, median, q3, high = boxplot_stats(self.values)
        sd = float(np.std(self.values, ddof=1)) if self.values.shape[0] > 1 else 0.0
        return {
            "min": low, "q1": q1, "median": median, "q3": q3, "max": high,
            "mean": float(np.mean(self.values)), "sd": sd,
        }

    def csv_rows(self) -> List[Dict[str, Any]]:
        return [
            {"setting": self.setting, "replication": r, "amr": float(v)}
            for r, v in enumerate(self.values)
        ]

    def summary_rows(self) -> List[Dict[str, Any]]:
        return [{"setting": self.setting, "statistic": k, "value": v} for k, v in self.summary().items()]


AMR_FIELDS = ["setting", "replication", "amr"]
SUMMARY_FIELDS = ["setting", "statistic", "value"]


def run_replication(plan: ExperimentPlan, config: ClassifierConfig, replication: int) -> float:
    """Train on fresh learning samples and return the test AMR of one replication."""
    pair = plan.resolve_pair()
    rng = replication_stream(plan.seed, replication)
    learning = draw_two_class(pair, plan.n_train, rng, training=True)
    model = train(learning, config)
    testing = draw_two_class(pair, plan.n_test, rng, training=False)
    predicted = [predict(model, x).label for x in testing.points]
    return amr(predicted, testing.labels)


def run_experiment(plan: ExperimentPlan, config: Optional[ClassifierConfig] = None,
                   threads: int = 0) -> AmrSample:
    """
    Run every replication of ``plan``.

    Args:
        plan: Setting, sizes, replication count and seed
        config: Classifier configuration shared by all replications
        threads: Replications run concurrently (0 = serial)

    Returns:
        AmrSample in replication order

    Raises:
        ReplicationFailed: On the first failing replication, with its index
    """
    config = config or ClassifierConfig()
    run_id = new_run_id()
    started = time.perf_counter()

    def run(replication: int) -> float:
        try:
            value = run_replication(plan, config, replication)
        except Exception as e:
            logger.error("replication %d failed: %s", replication, e,
                         extra={"run_id": run_id, "replication": replication})
            raise ReplicationFailed(replication, e) from e
        logger.debug("replication %d AMR %.6g", replication, value,
                     extra={"run_id": run_id, "replication": replication})
        return value

    indices = range(plan.replications)
    if threads > 0:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(run, indices))
    else:
        values = [run(r) for r in indices]

    result = AmrSample(values=np.asarray(values, dtype=float), setting=plan.label, seed=plan.seed)
    logger.info(
        "experiment finished",
        extra={"run_id": run_id, "setting": plan.label, "replications": plan.replications,
               "mean_amr": result.summary()["mean"], "seconds": time.perf_counter() - started},
    )
    return result


@dataclass
class TimingRow:
    d: int
    n: int
    mean_s: float
    sd_s: float
    repetitions: int
    samples: List[float] = field(default_factory=list, repr=False)

    def csv_row(self) -> Dict[str, Any]:
        return {"d": self.d, "n": self.n, "mean_s": self.mean_s, "sd_s": self.sd_s,
                "repetitions": self.repetitions}


TIMING_FIELDS = ["d", "n", "mean_s", "sd_s", "repetitions"]


_GRID_TOKEN = re.compile(r"^\s*([dn])\s*=\s*([0-9,\s]+)$")


def parse_grid(text: str) -> List[Tuple[int, int]]:
    """
    Parse a grid such as ``"d=5 n=200"`` or ``"d=5,10 n=200,500"``.

    Returns:
        (d, n) cells, d-major
    """
    values: Dict[str, List[int]] = {}
    for token in re.split(r"\s+(?=[dn]\s*=)", text.strip()):
        match = _GRID_TOKEN.match(token)
        if not match:
            raise InvalidPlan(f"cannot parse grid token '{token}' (expected d=... n=...)")
        numbers = [int(v) for v in re.split(r"[,\s]+", match.group(2).strip()) if v]
        if not numbers or any(v <= 0 for v in numbers):
            raise InvalidPlan(f"grid values must be positive integers: '{token}'")
        values[match.group(1)] = numbers
    if set(values) != {"d", "n"}:
        raise InvalidPlan(f"grid needs both d and n, got '{text}'")
    return [(d, n) for d in values["d"] for n in values["n"]]


def run_timing(grid: Sequence[Tuple[int, int]] = DEFAULT_TIMING_GRID, kind: str = "location",
               repetitions: int = 100, seed: int = 0,
               config: Optional[ClassifierConfig] = None,
               test_per_class: int = TIMING_TEST_PER_CLASS) -> List[TimingRow]:
    """
    Wall-clock time of training on n points (n/2 per class) plus classifying
    2 * ``test_per_class`` points, per (d, n) cell.

    Runs serially on the calling thread.
    """
    if not grid:
        raise InvalidPlan("timing grid is empty")
    if repetitions < 1:
        raise InvalidPlan(f"repetitions must be >= 1, got {repetitions}")
    config = config or ClassifierConfig()
    rows = []
    for cell, (d, n) in enumerate(grid):
        if n < 2 * (d + 1):
            raise InvalidPlan(f"n={n} is too small for d={d}: each class needs d+1 points")
        pair = timing_setting(kind, d)
        samples = []
        for rep in range(repetitions):
            rng = replication_stream(seed, cell * repetitions + rep)
            learning = draw_two_class(pair, n // 2, rng, training=True)
            testing = draw_two_class(pair, test_per_class, rng, training=False)
            started = time.perf_counter()
            model = train(learning, config)
            for x in testing.points:
                predict(model, x)
            samples.append(time.perf_counter() - started)
        sd = float(np.std(samples, ddof=1)) if repetitions > 1 else 0.0
        rows.append(TimingRow(d=d, n=n, mean_s=float(np.mean(samples)), sd_s=sd,
                              repetitions=repetitions, samples=samples))
        logger.info("timing d=%d n=%d: %.4f s", d, n, rows[-1].mean_s)
    return rows
