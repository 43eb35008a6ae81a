"""
Error classification for ddalpha commands.

Maps every exception to a category, a user-facing message and the stable
exit-code contract of the command line front end:

    0 success, 2 input error, 3 training error, 4 experiment failure.

Anything that is not a ``DDAlphaError`` is an internal failure (exit 1).
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

from ddalpha import errors


class ErrorCategory(Enum):
    """Categorization of error types for targeted handling."""
    INPUT = "input"            # unreadable data, bad flags, model format
    TRAINING = "training"      # depth / LP / alpha-procedure failures
    EXPERIMENT = "experiment"  # replication or fold failures
    INTERNAL = "internal"      # bugs


EXIT_CODES = {
    ErrorCategory.INPUT: 2,
    ErrorCategory.TRAINING: 3,
    ErrorCategory.EXPERIMENT: 4,
    ErrorCategory.INTERNAL: 1,
}


@dataclass
class ErrorClassification:
    """Complete error classification with handling instructions."""
    category: ErrorCategory
    exit_code: int
    error_type: str
    user_message: str
    suggested_action: str
    index: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for logging."""
        return {
            "category": self.category.value,
            "exit_code": self.exit_code,
            "error_type": self.error_type,
            "user_message": self.user_message,
            "suggested_action": self.suggested_action,
            "index": self.index,
        }


_INPUT_ERRORS = (
    errors.DatasetParseError,
    errors.SchemaMismatch,
    errors.ModelFormatError,
    errors.ConfigError,
    errors.InvalidPlan,
    errors.LengthMismatch,
    errors.EmptyInput,
)

_TRAINING_ERRORS = (
    errors.TooFewPoints,
    errors.NumericalBreakdown,
    errors.NotPositiveDefinite,
    errors.DegenerateData,
    errors.DegenerateProjection,
    errors.NoAdmissiblePair,
)

_SUGGESTIONS = {
    ErrorCategory.INPUT: "Check the input files and command line flags",
    ErrorCategory.TRAINING: "Check class sizes and the chosen depth for degenerate data",
    ErrorCategory.EXPERIMENT: "Re-run the reported replication or fold with --debug",
    ErrorCategory.INTERNAL: "Re-run with --debug and report the traceback",
}


def classify_error(error: BaseException) -> ErrorClassification:
    """
    Classify an exception raised by a ddalpha command.

    Args:
        error: The exception to classify

    Returns:
        ErrorClassification carrying the exit code and message
    """
    index = None
    if isinstance(error, _INPUT_ERRORS):
        category = ErrorCategory.INPUT
    elif isinstance(error, _TRAINING_ERRORS):
        category = ErrorCategory.TRAINING
    elif isinstance(error, (errors.ReplicationFailed, errors.FoldFailed)):
        category = ErrorCategory.EXPERIMENT
        index = error.index
    else:
        category = ErrorCategory.INTERNAL

    return ErrorClassification(
        category=category,
        exit_code=EXIT_CODES[category],
        error_type=type(error).__name__,
        user_message=f"{type(error).__name__}: {error}",
        suggested_action=_SUGGESTIONS[category],
        index=index,
    )
