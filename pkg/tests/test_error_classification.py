"""
Tests for mapping exceptions to categories and exit codes.
"""

import pytest

from ddalpha import errors
from ddalpha.error_classification import ErrorCategory, classify_error


@pytest.mark.parametrize("error, category, code", [
    (errors.DatasetParseError("bad row", row=3), ErrorCategory.INPUT, 2),
    (errors.SchemaMismatch("d"), ErrorCategory.INPUT, 2),
    (errors.ModelFormatError("version"), ErrorCategory.INPUT, 2),
    (errors.ConfigError("flag"), ErrorCategory.INPUT, 2),
    (errors.InvalidPlan("setting 0"), ErrorCategory.INPUT, 2),
    (errors.TooFewPoints("class b"), ErrorCategory.TRAINING, 3),
    (errors.NumericalBreakdown("cycling"), ErrorCategory.TRAINING, 3),
    (errors.NoAdmissiblePair("pair"), ErrorCategory.TRAINING, 3),
    (RuntimeError("bug"), ErrorCategory.INTERNAL, 1),
])
def test_categories(error, category, code):
    classification = classify_error(error)
    assert classification.category is category
    assert classification.exit_code == code
    assert classification.error_type == type(error).__name__


def test_experiment_failures_carry_the_index():
    classification = classify_error(errors.ReplicationFailed(17, errors.TooFewPoints("b")))
    assert classification.exit_code == 4
    assert classification.index == 17
    assert "replication 17" in classification.user_message

    fold = classify_error(errors.FoldFailed(2, ValueError("x")))
    assert fold.category is ErrorCategory.EXPERIMENT
    assert fold.to_dict()["index"] == 2
