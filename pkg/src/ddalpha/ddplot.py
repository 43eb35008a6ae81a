"""
DD-plot export.

Every point is written with its depth with respect to each training class,
its label, the outsider flag and a flag for training points sitting on
their own class's convex hull (own-class depth at the minimum 1/n_j), which
helps spotting outliers by eye. For two classes the zero-level curve of the
trained separator is sampled and can be rendered with the points as a
minimal SVG scatter plot.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union
from xml.sax.saxutils import escape

import numpy as np

from ddalpha.alpha_procedure import Separator
from ddalpha.classifier import Model
from ddalpha.core.linalg import as_matrix
from ddalpha.depth import is_outsider
from ddalpha.reporting import provenance

logger = logging.getLogger(__name__)

CURVE_SAMPLES = 512
HULL_TOL = 1e-9

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


@dataclass
class DdPlot:
    """Depth coordinates of a set of points with respect to the model's classes."""
    class_names: Sequence[str]
    depths: np.ndarray
    labels: List[Optional[str]]
    outsider: np.ndarray
    hull_vertex: np.ndarray
    curve: np.ndarray
    seed: Optional[int] = None

    @property
    def fieldnames(self) -> List[str]:
        return [f"depth_{name}" for name in self.class_names] + ["label", "outsider", "hull_vertex"]

    def csv_rows(self) -> List[Dict[str, Any]]:
        rows = []
        for i in range(self.depths.shape[0]):
            row: Dict[str, Any] = {
                f"depth_{name}": float(self.depths[i, j]) for j, name in enumerate(self.class_names)
            }
            row["label"] = self.labels[i] if self.labels[i] is not None else ""
            row["outsider"] = bool(self.outsider[i])
            row["hull_vertex"] = bool(self.hull_vertex[i])
            rows.append(row)
        return rows

    @property
    def curve_fieldnames(self) -> List[str]:
        return ["index"] + [f"depth_{name}" for name in self.class_names]

    def curve_rows(self) -> List[Dict[str, Any]]:
        return [
            {"index": i, **{f"depth_{name}": float(p[j]) for j, name in enumerate(self.class_names)}}
            for i, p in enumerate(self.curve)
        ]


def _ray_coefficients(separator: Separator, theta: float) -> np.ndarray:
    """Coefficients c_1..c_p of the separator along the ray rho * (cos t, sin t)."""
    c, s = math.cos(theta), math.sin(theta)
    coefficients = np.zeros(separator.degree + 1)
    for term, w in zip(separator.monomials, separator.weights):
        a, b = term.exponents
        coefficients[a + b] += w * (c ** a) * (s ** b)
    return coefficients[1:]


def separator_curve(separator: Separator, samples: int = CURVE_SAMPLES) -> np.ndarray:
    """
    Sample the zero-level curve of a two-class separator inside [0, 1]^2.

    A linear separator is a line through the origin and is sampled along its
    segment in the unit square. Otherwise ``samples`` rays from the origin
    are intersected with the curve, keeping the nearest positive root that
    lies in the square.

    Returns:
        (m, 2) array of curve points, m <= ``samples``
    """
    if len(separator.monomials[0].exponents) != 2:
        raise ValueError("separator curves are only defined for two classes")

    if separator.degree == 1 or all(term.degree == 1 for term, w in
                                    zip(separator.monomials, separator.weights) if w != 0.0):
        linear = {term.exponents: w for term, w in zip(separator.monomials, separator.weights)
                  if term.degree == 1}
        w1, w2 = linear.get((1, 0), 0.0), linear.get((0, 1), 0.0)
        direction = np.array([-w2, w1])
        if direction[0] < 0 or direction[1] < 0:
            direction = -direction
        if np.any(direction < 0) or not np.any(direction > 0):
            return np.zeros((0, 2))
        direction = direction / direction.max()
        t = np.linspace(0.0, 1.0, samples)
        return t[:, None] * direction

    points = []
    for theta in np.linspace(0.0, math.pi / 2.0, samples):
        coefficients = _ray_coefficients(separator, float(theta))
        nonzero = np.flatnonzero(np.abs(coefficients) > 0.0)
        if nonzero.size == 0:
            continue
        trimmed = coefficients[:nonzero[-1] + 1]
        if trimmed.shape[0] < 2:
            continue
        roots = np.roots(trimmed[::-1])
        real = roots[np.abs(roots.imag) <= 1e-9].real
        candidates = np.sort(real[real > 0.0])
        for rho in candidates:
            point = rho * np.array([math.cos(theta), math.sin(theta)])
            if np.all(point <= 1.0 + HULL_TOL):
                points.append(np.clip(point, 0.0, 1.0))
                break
    return np.asarray(points).reshape(-1, 2)


def build_ddplot(model: Model, points, labels: Optional[Sequence[str]] = None,
                 threads: int = 0) -> DdPlot:
    """
    Depth coordinates, outsider flags and hull-vertex flags of ``points``.

    A point is flagged as a hull vertex when its label names a training class
    and its depth in that class does not exceed 1/n_j.
    """
    x = as_matrix(points, "points")
    depths = model.depth_space.transform_many(x, threads=threads)
    names = list(model.class_names)
    sizes = model.class_sizes
    label_list: List[Optional[str]] = list(labels) if labels is not None else [None] * x.shape[0]

    hull_vertex = np.zeros(x.shape[0], dtype=bool)
    for i, label in enumerate(label_list):
        if label in names:
            j = names.index(label)
            own = depths[i, j]
            hull_vertex[i] = 0.0 < own <= 1.0 / sizes[j] + HULL_TOL

    curve = np.zeros((0, model.q))
    if model.q == 2:
        curve = separator_curve(model.separators[(0, 1)])
    return DdPlot(
        class_names=names,
        depths=depths,
        labels=label_list,
        outsider=np.array([is_outsider(row) for row in depths], dtype=bool),
        hull_vertex=hull_vertex,
        curve=curve,
        seed=model.seed,
    )


def render_svg(plot: DdPlot, size: int = 480, margin: int = 40) -> str:
    """Minimal SVG: axes, points colored by label and the separator polyline.

    The tool version and seed go into a comment right after the root tag.
    """
    if len(plot.class_names) != 2:
        raise ValueError("SVG rendering needs exactly two classes")
    span = size - 2 * margin

    def sx(v: float) -> float:
        return margin + v * span

    def sy(v: float) -> float:
        return size - margin - v * span

    names = list(plot.class_names)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f"<!-- {provenance(plot.seed)} -->",
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(1)}" y2="{sy(0)}" stroke="black"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(0)}" y2="{sy(1)}" stroke="black"/>',
        f'<text x="{sx(0.5)}" y="{size - 8}" text-anchor="middle" font-size="12">'
        f'depth {escape(names[0])}</text>',
        f'<text x="12" y="{sy(0.5)}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 12 {sy(0.5)})">depth {escape(names[1])}</text>',
    ]
    for (d1, d2), label in zip(plot.depths, plot.labels):
        index = names.index(label) if label in names else len(_PALETTE) - 1
        colour = _PALETTE[index % len(_PALETTE)]
        parts.append(f'<circle cx="{sx(d1):.2f}" cy="{sy(d2):.2f}" r="2.5" fill="{colour}"/>')
    if plot.curve.shape[0] > 1:
        path = " ".join(f"{sx(p[0]):.2f},{sy(p[1]):.2f}" for p in plot.curve)
        parts.append(f'<polyline points="{path}" fill="none" stroke="black" stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(plot: DdPlot, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(render_svg(plot), encoding="utf-8")
    logger.debug("wrote DD-plot SVG to %s", path)
    return path
