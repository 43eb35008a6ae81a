"""
Error metrics and benchmark protocols.

``evaluate`` trains the classifier on every training part of a split scheme,
classifies the matching test part and aggregates the misclassification rate,
the confusion counts, the share of outsiders among the test points and the
timings into an ``EvalReport``.
"""

import logging
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ddalpha.classifier import ClassifierConfig, OutsiderRule, predict, train
from ddalpha.depth import LabeledDataset
from ddalpha.errors import EmptyInput, FoldFailed, InvalidPlan, LengthMismatch

logger = logging.getLogger(__name__)

Split = Tuple[np.ndarray, np.ndarray]


def amr(predicted, truth) -> float:
    """
    Average misclassification rate: the fraction of mismatching labels.

    Raises:
        LengthMismatch: If the vectors differ in length or are empty
    """
    predicted = np.asarray(predicted).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if predicted.shape != truth.shape:
        raise LengthMismatch(f"{predicted.shape[0]} predictions for {truth.shape[0]} labels")
    if predicted.shape[0] == 0:
        raise LengthMismatch("cannot compute a misclassification rate of zero labels")
    return float(np.count_nonzero(predicted != truth)) / predicted.shape[0]


def _median(sorted_values: np.ndarray) -> float:
    n = sorted_values.shape[0]
    mid = n // 2
    if n % 2:
        return float(sorted_values[mid])
    return float((sorted_values[mid - 1] + sorted_values[mid]) / 2.0)


def boxplot_stats(values) -> Tuple[float, float, float, float, float]:
    """
    Five-number summary (min, q1, median, q3, max).

    Quartiles are medians of the lower and upper halves; for odd counts the
    median itself belongs to neither half.

    Raises:
        EmptyInput: If ``values`` is empty
    """
    v = np.sort(np.asarray(values, dtype=float).reshape(-1))
    n = v.shape[0]
    if n == 0:
        raise EmptyInput("boxplot statistics need at least one value")
    if n == 1:
        return (float(v[0]),) * 5
    lower = v[:n // 2]
    upper = v[(n + 1) // 2:]
    return float(v[0]), _median(lower), _median(v), _median(upper), float(v[-1])


class SplitScheme(ABC):
    """Partition of a dataset into (train, test) index pairs."""

    @abstractmethod
    def splits(self, ds: LabeledDataset) -> List[Split]:
        pass

    @property
    @abstractmethod
    def name(self) -> str:
        pass


@dataclass(frozen=True)
class TrainTest(SplitScheme):
    """
    A single split.

    Either ``train_per_class`` points are drawn from every class, or
    ``train_total`` points overall; everything else is test data.
    """
    train_per_class: Optional[int] = None
    train_total: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if (self.train_per_class is None) == (self.train_total is None):
            raise InvalidPlan("give exactly one of train_per_class and train_total")

    @property
    def name(self) -> str:
        return "train-test"

    def splits(self, ds: LabeledDataset) -> List[Split]:
        rng = np.random.default_rng(self.seed)
        if self.train_per_class is not None:
            parts = []
            for j in range(ds.q):
                members = np.flatnonzero(ds.labels == j)
                if self.train_per_class >= members.shape[0]:
                    raise InvalidPlan(
                        f"class '{ds.class_names[j]}' has {members.shape[0]} points, "
                        f"cannot hold out after drawing {self.train_per_class}"
                    )
                parts.append(rng.permutation(members)[:self.train_per_class])
            train_idx = np.sort(np.concatenate(parts))
        else:
            if not 0 < self.train_total < ds.n:
                raise InvalidPlan(f"train_total must lie in 1..{ds.n - 1}, got {self.train_total}")
            train_idx = np.sort(rng.permutation(ds.n)[:self.train_total])
        test_idx = np.setdiff1d(np.arange(ds.n), train_idx)
        return [(train_idx, test_idx)]


@dataclass(frozen=True)
class KFold(SplitScheme):
    k: int = 10
    seed: int = 0

    @property
    def name(self) -> str:
        return f"{self.k}-fold"

    def splits(self, ds: LabeledDataset) -> List[Split]:
        if not 2 <= self.k <= ds.n:
            raise InvalidPlan(f"k must lie in 2..{ds.n}, got {self.k}")
        order = np.random.default_rng(self.seed).permutation(ds.n)
        result = []
        for part in np.array_split(order, self.k):
            test_idx = np.sort(part)
            result.append((np.setdiff1d(np.arange(ds.n), test_idx), test_idx))
        return result


@dataclass(frozen=True)
class LeaveOneOut(SplitScheme):

    @property
    def name(self) -> str:
        return "loo"

    def splits(self, ds: LabeledDataset) -> List[Split]:
        if ds.n < 2:
            raise InvalidPlan("leave-one-out needs at least two points")
        everything = np.arange(ds.n)
        return [(np.delete(everything, i), np.array([i])) for i in range(ds.n)]


def parse_scheme(name: str, k: int = 10, train_per_class: Optional[int] = None,
                 train_total: Optional[int] = None, seed: int = 0) -> SplitScheme:
    """Split scheme from its command line name: train-test, kfold or loo."""
    if name == "train-test":
        if train_per_class is None and train_total is None:
            raise InvalidPlan("train-test needs --train-per-class or --train-total")
        return TrainTest(train_per_class=train_per_class, train_total=train_total, seed=seed)
    if name == "kfold":
        return KFold(k=k, seed=seed)
    if name == "loo":
        return LeaveOneOut()
    raise InvalidPlan(f"unknown split scheme '{name}'")


@dataclass
class FoldOutcome:
    truth: np.ndarray
    predicted: np.ndarray
    outsider: np.ndarray
    train_seconds: float
    test_seconds: float


@dataclass
class EvalReport:
    """Aggregated result of one evaluation run."""
    amr: float
    confusion: np.ndarray
    outsider_rate: float
    train_seconds: float
    test_seconds_per_point: float
    class_names: Tuple[str, ...]
    scheme: str
    rule: str
    folds: int = 1
    n_test: int = field(init=False)

    def __post_init__(self):
        self.n_test = int(self.confusion.sum())

    def csv_rows(self, timings: bool = False) -> List[Dict[str, Any]]:
        """
        Rows for the ``rule, metric, truth, predicted, value`` CSV layout.

        Timings are left out unless asked for, so reruns give identical files.
        """
        metrics: List[Tuple[str, Any]] = [
            ("amr", self.amr),
            ("outsider_rate", self.outsider_rate),
            ("n_test", self.n_test),
            ("folds", self.folds),
        ]
        if timings:
            metrics += [
                ("train_seconds", self.train_seconds),
                ("test_seconds_per_point", self.test_seconds_per_point),
            ]
        rows: List[Dict[str, Any]] = [
            {"rule": self.rule, "metric": metric, "truth": "", "predicted": "", "value": value}
            for metric, value in metrics
        ]
        for t, truth in enumerate(self.class_names):
            for p, predicted in enumerate(self.class_names):
                rows.append({"rule": self.rule, "metric": "confusion", "truth": truth,
                             "predicted": predicted, "value": int(self.confusion[t, p])})
        return rows

    def summary_block(self) -> str:
        lines = [
            f"scheme:          {self.scheme} ({self.folds} split(s), {self.n_test} test points)",
            f"outsider rule:   {self.rule}",
            f"AMR:             {self.amr:.4f}",
            f"outsider rate:   {self.outsider_rate:.4f}",
            f"time train (s):  {self.train_seconds:.4f}",
            f"time test (s):   {self.test_seconds_per_point:.6f} per point",
            "confusion (rows: truth, columns: predicted):",
        ]
        width = max(len(name) for name in self.class_names)
        lines.append(" " * (width + 2) + " ".join(f"{name:>{width}}" for name in self.class_names))
        for t, name in enumerate(self.class_names):
            counts = " ".join(f"{int(c):>{width}}" for c in self.confusion[t])
            lines.append(f"{name:>{width}}  {counts}")
        return "\n".join(lines)


CSV_FIELDS = ["rule", "metric", "truth", "predicted", "value"]


def _run_fold(ds: LabeledDataset, split: Split, config: ClassifierConfig) -> FoldOutcome:
    train_idx, test_idx = split
    started = time.perf_counter()
    model = train(ds.subset(train_idx), config)
    trained = time.perf_counter()
    predictions = [predict(model, ds.points[i]) for i in test_idx]
    finished = time.perf_counter()
    return FoldOutcome(
        truth=ds.labels[test_idx],
        predicted=np.array([p.label for p in predictions], dtype=int),
        outsider=np.array([p.outsider for p in predictions], dtype=bool),
        train_seconds=trained - started,
        test_seconds=finished - trained,
    )


def _aggregate(ds: LabeledDataset, outcomes: List[FoldOutcome], scheme: SplitScheme,
               rule: OutsiderRule) -> EvalReport:
    truth = np.concatenate([o.truth for o in outcomes])
    predicted = np.concatenate([o.predicted for o in outcomes])
    outsider = np.concatenate([o.outsider for o in outcomes])
    confusion = np.zeros((ds.q, ds.q), dtype=int)
    np.add.at(confusion, (truth, predicted), 1)
    return EvalReport(
        amr=amr(predicted, truth),
        confusion=confusion,
        outsider_rate=float(np.count_nonzero(outsider)) / outsider.shape[0],
        train_seconds=float(np.mean([o.train_seconds for o in outcomes])),
        test_seconds_per_point=float(sum(o.test_seconds for o in outcomes)) / truth.shape[0],
        class_names=ds.class_names,
        scheme=scheme.name,
        rule=rule.name,
        folds=len(outcomes),
    )


def _run_splits(ds: LabeledDataset, splits: Sequence[Split], config: ClassifierConfig,
                threads: int) -> List[FoldOutcome]:
    def run(indexed):
        index, split = indexed
        try:
            return _run_fold(ds, split, config)
        except Exception as e:
            logger.error("fold %d failed: %s", index, e, extra={"fold": index})
            raise FoldFailed(index, e) from e

    if threads > 0:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, enumerate(splits)))
    return [run(item) for item in enumerate(splits)]


def evaluate(ds: LabeledDataset, scheme: SplitScheme,
             config: Optional[ClassifierConfig] = None, threads: int = 0) -> EvalReport:
    """
    Train and test the classifier on every split of ``scheme``.

    Args:
        ds: Labelled data
        scheme: TrainTest, KFold or LeaveOneOut
        config: Classifier configuration
        threads: Folds evaluated concurrently (0 = serial)

    Returns:
        EvalReport aggregated over all test points

    Raises:
        FoldFailed: If training or prediction fails on a split; carries its index
    """
    config = config or ClassifierConfig()
    splits = scheme.splits(ds)
    outcomes = _run_splits(ds, splits, config, threads)
    report = _aggregate(ds, outcomes, scheme, config.outsider_rule)
    logger.info(
        "evaluation finished",
        extra={"scheme": scheme.name, "folds": len(splits), "amr": report.amr,
               "outsider_rate": report.outsider_rate},
    )
    return report


def compare_outsider_rules(ds: LabeledDataset, scheme: SplitScheme, config: ClassifierConfig,
                           rules: Sequence[OutsiderRule], threads: int = 0) -> Dict[str, EvalReport]:
    """
    One EvalReport per outsider rule, all computed on identical splits.

    Returns:
        Mapping from rule name to its report, in the order of ``rules``
    """
    if not rules:
        raise InvalidPlan("no outsider rules to compare")
    splits = scheme.splits(ds)
    reports: Dict[str, EvalReport] = {}
    for rule in rules:
        rule_config = replace(config, outsider_rule=rule)
        outcomes = _run_splits(ds, splits, rule_config, threads)
        reports[rule.name] = _aggregate(ds, outcomes, scheme, rule)
        logger.info("outsider rule %s: AMR %.4f", rule.name, reports[rule.name].amr)
    return reports
