"""
Pytest configuration and shared fixtures for ddalpha tests.

Fixtures give seeded random generators, small labelled data sets and CSV
files built from them. Every random draw in the suite goes through a
seeded generator so results are reproducible.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

SRC = Path(__file__).resolve().parent.parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from ddalpha.depth import LabeledDataset  # noqa: E402


@pytest.fixture
def rng():
    """Seeded generator, fresh per test."""
    return np.random.default_rng(20240611)


def make_clouds(rng, n_per_class=30, shift=10.0, d=2):
    """Two spherical Gaussian clouds, the second shifted along every axis."""
    first = rng.standard_normal((n_per_class, d))
    second = rng.standard_normal((n_per_class, d)) + shift
    labels = np.repeat([0, 1], n_per_class)
    return LabeledDataset(np.vstack([first, second]), labels, ("a", "b"))


@pytest.fixture
def separated_clouds(rng):
    """Two well separated 2-D clouds of 30 points each."""
    return make_clouds(rng)


@pytest.fixture
def three_clouds(rng):
    """Three separated 2-D clouds of 15 points each."""
    centers = np.array([[0.0, 0.0], [8.0, 0.0], [0.0, 8.0]])
    points = np.vstack([rng.standard_normal((15, 2)) + c for c in centers])
    labels = np.repeat([0, 1, 2], 15)
    return LabeledDataset(points, labels, ("x", "y", "z"))


def write_dataset_csv(path, ds, label_column="class"):
    lines = [",".join([f"f{i + 1}" for i in range(ds.d)] + [label_column])]
    for point, label in zip(ds.points, ds.labels):
        cells = [repr(float(v)) for v in point] + [ds.class_names[label]]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def clouds_csv(tmp_path, separated_clouds):
    """CSV file of ``separated_clouds`` with label column ``class``."""
    return write_dataset_csv(tmp_path / "clouds.csv", separated_clouds)
