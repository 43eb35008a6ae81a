"""
CSV dataset ingestion.

A dataset file is UTF-8 CSV with a header row, comma separators and a
decimal point. One column holds the class labels (named on the command
line); every other column is a numeric feature. A ``#`` starts a comment
that runs to the end of the line; blank lines are skipped.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ddalpha.depth import LabeledDataset
from ddalpha.errors import DatasetParseError, SchemaMismatch

logger = logging.getLogger(__name__)


@dataclass
class DatasetFile:
    """Parsed contents of a dataset CSV."""
    path: Path
    feature_names: Tuple[str, ...]
    points: np.ndarray
    labels: Optional[List[str]] = None

    @property
    def d(self) -> int:
        return len(self.feature_names)

    def to_dataset(self) -> LabeledDataset:
        if self.labels is None:
            raise DatasetParseError(f"{self.path} has no label column")
        return LabeledDataset.from_labels(self.points, self.labels)


def _parse_number(cell: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        return float("nan")
    # nan counts as unparseable
    return value if value == value else float("nan")


def _read_frame(path: Path) -> Tuple[List[str], pd.DataFrame]:
    try:
        raw = pd.read_csv(path, header=None, dtype=str, keep_default_na=False,
                          comment="#", skip_blank_lines=True, encoding="utf-8")
    except OSError as e:
        raise DatasetParseError(f"cannot read {path}: {e}")
    except UnicodeDecodeError as e:
        raise DatasetParseError(f"{path} is not UTF-8: {e}")
    except pd.errors.EmptyDataError:
        raise DatasetParseError(f"{path} is empty")
    except pd.errors.ParserError as e:
        raise DatasetParseError(f"{path} has ragged rows: {e}")

    # header=None keeps duplicate names unmangled
    header = [str(name).strip() for name in raw.iloc[0]]
    if len(set(header)) != len(header):
        raise DatasetParseError(f"{path} has duplicate column names")
    frame = raw.iloc[1:].reset_index(drop=True)
    frame.columns = header
    return header, frame


def read_dataset(path: Union[str, Path], label_column: Optional[str] = None,
                 expected_d: Optional[int] = None) -> DatasetFile:
    """
    Parse a dataset CSV.

    Rows in error messages count data rows from 1, skipping the header,
    comments and blank lines.

    Args:
        path: CSV file
        label_column: Name of the label column; required for training data,
            dropped from the features when present for prediction
        expected_d: Feature count the caller needs (a trained model's d)

    Returns:
        DatasetFile with the feature matrix and the raw label strings

    Raises:
        DatasetParseError: Missing label column, ragged rows, empty labels or
            non-numeric features; the message names the row and column
        SchemaMismatch: If the feature count differs from ``expected_d``
    """
    path = Path(path)
    header, frame = _read_frame(path)
    if label_column is not None and label_column not in header:
        raise DatasetParseError(
            f"label column '{label_column}' not found in {path} (columns: {', '.join(header)})",
            column=label_column,
        )
    feature_names = tuple(name for name in header if name != label_column)
    if not feature_names:
        raise DatasetParseError(f"{path} has no feature columns")
    if frame.empty:
        raise DatasetParseError(f"{path} has a header but no data rows")

    # short rows come back as NaN even with keep_default_na=False
    short = frame.isna().any(axis=1)
    if short.any():
        number = int(short.to_numpy().argmax()) + 1
        fields = int(frame.iloc[number - 1].notna().sum())
        raise DatasetParseError(
            f"row {number} has {fields} fields, header has {len(header)}", row=number
        )

    text = frame[list(feature_names)].apply(lambda column: column.str.strip())
    values = text.apply(lambda column: column.map(_parse_number)).to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        r, c = (int(i) for i in np.argwhere(bad)[0])
        name = feature_names[c]
        cell = text.iat[r, c]
        reason = (f"cannot parse '{cell}' as a number" if np.isnan(_parse_number(cell))
                  else "value must be finite")
        raise DatasetParseError(f"row {r + 1}, column '{name}': {reason}", row=r + 1, column=name)

    labels: Optional[List[str]] = None
    if label_column is not None:
        labels = frame[label_column].str.strip().tolist()
        empty = [i for i, label in enumerate(labels) if not label]
        if empty:
            raise DatasetParseError(f"row {empty[0] + 1} has an empty label",
                                    row=empty[0] + 1, column=label_column)

    if expected_d is not None and len(feature_names) != expected_d:
        raise SchemaMismatch(
            f"{path} has {len(feature_names)} feature columns, model expects {expected_d}"
        )
    logger.debug("read %d rows x %d features from %s", len(frame), len(feature_names), path)
    return DatasetFile(path=path, feature_names=feature_names, points=values, labels=labels)


def load_dataset(path: Union[str, Path], label_column: str) -> LabeledDataset:
    """Read a labelled CSV; labels map to class indices by first appearance."""
    return read_dataset(path, label_column).to_dataset()
