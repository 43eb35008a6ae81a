"""
Exception hierarchy for ddalpha.

Every error raised on purpose by the library derives from ``DDAlphaError`` so
that the command line front end can classify it into a stable exit code
(see ``ddalpha.error_classification``).
"""

from typing import Optional


class DDAlphaError(Exception):
    """Base class for all ddalpha errors."""
    pass


# Numeric kernel

class NumericalBreakdown(DDAlphaError):
    """The simplex kernel could not find a usable pivot or did not terminate."""
    pass


class NotPositiveDefinite(DDAlphaError):
    """A matrix handed to a Cholesky-based routine is not positive definite."""
    pass


# Statistics / depth

class DegenerateData(DDAlphaError):
    """Data that cannot support the requested location/scatter estimate."""
    pass


class TooFewPoints(DDAlphaError):
    """A class carries fewer than d+1 points."""

    def __init__(self, message: str, class_name: Optional[str] = None):
        super().__init__(message)
        self.class_name = class_name


# Alpha-procedure

class DegenerateProjection(DDAlphaError):
    """Every point lies at the origin of the 2-D feature subspace."""
    pass


class NoAdmissiblePair(DDAlphaError):
    """No pair of basic features relates to both classes being separated."""
    pass


# Evaluation

class LengthMismatch(DDAlphaError):
    pass


class EmptyInput(DDAlphaError):
    pass


class InvalidPlan(DDAlphaError):
    """An experiment plan or split scheme that cannot be executed."""
    pass


class ReplicationFailed(DDAlphaError):
    """A simulation replication raised; the whole run is aborted."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"replication {index} failed: {type(cause).__name__}: {cause}")
        self.index = index
        self.cause = cause


class FoldFailed(DDAlphaError):
    """Training or prediction failed on one cross-validation fold."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"fold {index} failed: {type(cause).__name__}: {cause}")
        self.index = index
        self.cause = cause


# Input / files

class DatasetParseError(DDAlphaError):
    """A dataset CSV could not be parsed."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        super().__init__(message)
        self.row = row
        self.column = column


class SchemaMismatch(DDAlphaError):
    """Input data does not have the dimension the model was trained on."""
    pass


class ModelFormatError(DDAlphaError):
    """A model document is malformed or has an unsupported version."""
    pass


class ConfigError(DDAlphaError):
    """Invalid project configuration or command line combination."""
    pass
