"""
Tests for error metrics, split schemes and the evaluation protocol.
"""

import numpy as np
import pytest

from ddalpha.classifier import ClassifierConfig, OutsiderKind, OutsiderRule
from ddalpha.depth import LabeledDataset
from ddalpha.errors import EmptyInput, FoldFailed, InvalidPlan, LengthMismatch
from ddalpha.evaluation import (
    CSV_FIELDS,
    KFold,
    LeaveOneOut,
    TrainTest,
    amr,
    boxplot_stats,
    compare_outsider_rules,
    evaluate,
    parse_scheme,
)


class TestMetrics:

    def test_amr(self):
        assert amr([0, 1, 1, 0], [0, 1, 0, 0]) == 0.25
        assert amr(["a"], ["a"]) == 0.0

    def test_amr_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            amr([0, 1], [0])
        with pytest.raises(LengthMismatch):
            amr([], [])

    def test_boxplot_odd(self):
        assert boxplot_stats([5, 1, 3, 2, 4]) == (1.0, 1.5, 3.0, 4.5, 5.0)

    def test_boxplot_even(self):
        assert boxplot_stats([1, 2, 3, 4]) == (1.0, 1.5, 2.5, 3.5, 4.0)

    def test_boxplot_single_value(self):
        assert boxplot_stats([0.3]) == (0.3,) * 5

    def test_boxplot_empty(self):
        with pytest.raises(EmptyInput):
            boxplot_stats([])


class TestSchemes:

    def test_leave_one_out(self, separated_clouds):
        splits = LeaveOneOut().splits(separated_clouds)
        assert len(splits) == separated_clouds.n
        for i, (train_idx, test_idx) in enumerate(splits):
            assert test_idx.tolist() == [i]
            assert train_idx.shape[0] == separated_clouds.n - 1

    def test_kfold_partitions(self, separated_clouds):
        splits = KFold(k=7, seed=1).splits(separated_clouds)
        assert len(splits) == 7
        tested = np.concatenate([test_idx for _, test_idx in splits])
        assert sorted(tested.tolist()) == list(range(separated_clouds.n))
        for train_idx, test_idx in splits:
            assert not set(train_idx) & set(test_idx)

    def test_kfold_bounds(self, separated_clouds):
        with pytest.raises(InvalidPlan):
            KFold(k=1).splits(separated_clouds)

    def test_train_per_class(self, separated_clouds):
        ((train_idx, test_idx),) = TrainTest(train_per_class=10, seed=4).splits(separated_clouds)
        assert np.bincount(separated_clouds.labels[train_idx]).tolist() == [10, 10]
        assert test_idx.shape[0] == 40

    def test_train_test_needs_exactly_one_size(self):
        with pytest.raises(InvalidPlan):
            TrainTest()
        with pytest.raises(InvalidPlan):
            TrainTest(train_per_class=3, train_total=6)

    def test_parse_scheme(self):
        assert parse_scheme("loo").name == "loo"
        assert parse_scheme("kfold", k=5).name == "5-fold"
        assert parse_scheme("train-test", train_total=20).name == "train-test"
        with pytest.raises(InvalidPlan):
            parse_scheme("train-test")
        with pytest.raises(InvalidPlan):
            parse_scheme("bootstrap")


class TestEvaluate:

    def test_separated_clouds_are_perfect(self, separated_clouds):
        report = evaluate(separated_clouds, KFold(k=5), ClassifierConfig(degree=1))
        assert report.amr == 0.0
        assert report.folds == 5
        assert report.n_test == separated_clouds.n
        assert report.confusion.tolist() == [[30, 0], [0, 30]]

    def test_loo_confusion_counts_every_point(self, rng):
        points = np.vstack([rng.standard_normal((12, 2)), rng.standard_normal((12, 2)) + 1.0])
        ds = LabeledDataset(points, np.repeat([0, 1], 12), ("a", "b"))
        report = evaluate(ds, LeaveOneOut(), ClassifierConfig(degree=1))
        assert report.n_test == 24
        assert report.confusion.sum(axis=1).tolist() == [12, 12]
        wrong = report.confusion[0, 1] + report.confusion[1, 0]
        assert report.amr == pytest.approx(wrong / 24)

    def test_row_order_does_not_matter_for_loo(self, rng):
        points = np.vstack([rng.standard_normal((10, 2)), rng.standard_normal((10, 2)) + 1.5])
        labels = np.repeat([0, 1], 10)
        order = rng.permutation(20)
        config = ClassifierConfig(degree=1, outsider_rule=OutsiderRule(kind=OutsiderKind.KNN_EUCLID))
        base = evaluate(LabeledDataset(points, labels, ("a", "b")), LeaveOneOut(), config)
        shuffled = evaluate(LabeledDataset(points[order], labels[order], ("a", "b")), LeaveOneOut(), config)
        assert base.amr == shuffled.amr
        np.testing.assert_array_equal(base.confusion, shuffled.confusion)

    def test_threads_do_not_change_the_report(self, separated_clouds):
        config = ClassifierConfig(degree=1)
        serial = evaluate(separated_clouds, KFold(k=4, seed=2), config)
        threaded = evaluate(separated_clouds, KFold(k=4, seed=2), config, threads=3)
        assert serial.csv_rows() == threaded.csv_rows()

    def test_outsiders_counted(self, rng):
        # test points far from the small training clouds become outsiders
        inner = rng.standard_normal((20, 2)) * 0.1
        outer = rng.standard_normal((20, 2)) * 0.1 + 5.0
        far = np.array([[50.0, 50.0], [-50.0, 50.0], [50.0, -50.0], [60.0, 0.0]])
        ds = LabeledDataset(np.vstack([inner, outer, far]),
                            np.concatenate([np.repeat([0, 1], 20), [0, 1, 0, 1]]), ("a", "b"))
        train_idx = np.arange(40)
        test_idx = np.arange(40, 44)

        class FixedSplit(TrainTest):
            def splits(self, data):
                return [(train_idx, test_idx)]

        report = evaluate(ds, FixedSplit(train_total=40), ClassifierConfig(degree=1))
        assert report.outsider_rate == 1.0
        assert report.n_test == 4

    def test_failing_fold(self, rng):
        points = rng.standard_normal((8, 2))
        ds = LabeledDataset(points, np.array([0, 0, 0, 0, 0, 1, 1, 1]), ("a", "b"))
        # folds that leave class b with two points cannot be trained
        with pytest.raises(FoldFailed) as info:
            evaluate(ds, LeaveOneOut(), ClassifierConfig(degree=1))
        assert info.value.index == 5

    def test_csv_rows_leave_out_timings(self, separated_clouds):
        report = evaluate(separated_clouds, KFold(k=3), ClassifierConfig(degree=1))
        metrics = [row["metric"] for row in report.csv_rows()]
        assert "train_seconds" not in metrics
        assert metrics.count("confusion") == 4
        assert "train_seconds" in [row["metric"] for row in report.csv_rows(timings=True)]
        assert all(set(row) == set(CSV_FIELDS) for row in report.csv_rows())
        assert "AMR:" in report.summary_block()


def test_compare_outsider_rules(separated_clouds):
    rules = [OutsiderRule(), OutsiderRule(kind=OutsiderKind.KNN_EUCLID), OutsiderRule.parse("maxdepth")]
    reports = compare_outsider_rules(separated_clouds, KFold(k=3), ClassifierConfig(degree=1), rules)
    assert list(reports) == ["random", "knn", "maxdepth"]
    assert all(r.n_test == separated_clouds.n for r in reports.values())
    with pytest.raises(InvalidPlan):
        compare_outsider_rules(separated_clouds, KFold(k=3), ClassifierConfig(), [])
