"""
Model serialization.

A trained model is stored as a versioned UTF-8 JSON document. Real numbers
are written as decimal strings with 17 significant digits, which identify
every double exactly, so load followed by save reproduces the file byte for
byte. Documents are validated against ``model-schema.json`` on load.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import jsonschema
import numpy as np

from ddalpha import __version__
from ddalpha.alpha_procedure import Monomial, Separator, StepRecord, monomials
from ddalpha.classifier import FORMAT_VERSION, Estimator, Model, OutsiderKind, OutsiderRule
from ddalpha.depth import DepthKind, LocationScatter
from ddalpha.errors import ModelFormatError

logger = logging.getLogger(__name__)

FORMAT_NAME = "ddalpha-model"


def _load_schema() -> Dict[str, Any]:
    """Load the JSON schema shipped next to this module."""
    schema_path = Path(__file__).parent / "model-schema.json"
    with open(schema_path, "r", encoding="utf-8") as f:
        return json.load(f)


def _dec(value: float) -> str:
    return format(float(value), ".17g")


def _vec(values) -> List[str]:
    return [_dec(v) for v in np.asarray(values, dtype=float).reshape(-1)]


def _mat(values) -> List[List[str]]:
    return [_vec(row) for row in np.atleast_2d(np.asarray(values, dtype=float))]


def _summary(ls: LocationScatter) -> Dict[str, Any]:
    return {"mu": _vec(ls.mu), "sigma": _mat(ls.sigma)}


def to_document(model: Model) -> Dict[str, Any]:
    """JSON-ready dictionary of a model."""
    rule = model.outsider_rule
    return {
        "format": FORMAT_NAME,
        "generator": f"ddalpha {__version__}",
        "version": model.version,
        "q": model.q,
        "d": model.d,
        "depth_kind": model.depth_kind.value,
        "degree": model.degree,
        "seed": model.seed,
        "class_names": list(model.class_names),
        "priors": _vec(model.priors),
        "outsider_rule": {
            "kind": rule.kind.value,
            "k": rule.k,
            "estimator": rule.estimator.value,
            "seed": rule.seed,
        },
        "separators": [
            {
                "pair": [int(j), int(k)],
                "degree": sep.degree,
                "monomials": [list(m.exponents) for m in sep.monomials],
                "weights": _vec(sep.weights),
                "steps": [
                    {"features": list(step.features), "alpha": _dec(step.alpha), "amr": _dec(step.amr)}
                    for step in sep.steps
                ],
            }
            for (j, k), sep in sorted(model.separators.items())
        ],
        "depth_summaries": [_summary(ls) for ls in model.depth_summaries],
        "outsider_scatter": [_summary(ls) for ls in model.outsider_scatter],
        "pooled_scatter": _mat(model.pooled_scatter) if model.pooled_scatter is not None else None,
        "training": {
            "points": _mat(model.points),
            "labels": [int(v) for v in model.labels],
        },
    }


def dumps(model: Model) -> str:
    """Canonical text of a model document."""
    return json.dumps(to_document(model), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save_model(model: Model, path: Union[str, Path]) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(model))
    logger.info("wrote model to %s", path, extra={"q": model.q, "d": model.d})


def _read_vector(values: List[str], name: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in values], dtype=float)
    except ValueError as e:
        raise ModelFormatError(f"bad numeric entry in {name}: {e}")


def _read_matrix(rows: List[List[str]], name: str) -> np.ndarray:
    matrix = [_read_vector(row, name) for row in rows]
    if len({row.shape[0] for row in matrix}) > 1:
        raise ModelFormatError(f"{name} is not rectangular")
    return np.vstack(matrix) if matrix else np.zeros((0, 0))


def _location_scatter(entry: Dict[str, Any], name: str) -> LocationScatter:
    return LocationScatter(mu=_read_vector(entry["mu"], f"{name}.mu"),
                           sigma=_read_matrix(entry["sigma"], f"{name}.sigma"))


def from_document(doc: Dict[str, Any]) -> Model:
    """
    Rebuild a model from its document.

    Raises:
        ModelFormatError: If the document fails schema validation, carries an
            unsupported version or is internally inconsistent
    """
    try:
        jsonschema.validate(doc, _load_schema())
    except jsonschema.ValidationError as e:
        raise ModelFormatError(f"model validation failed: {e.message}")
    if doc["version"] != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model version {doc['version']} (this build reads version {FORMAT_VERSION})"
        )

    q, d = doc["q"], doc["d"]
    points = _read_matrix(doc["training"]["points"], "training.points")
    labels = np.asarray(doc["training"]["labels"], dtype=int)
    if points.shape != (labels.shape[0], d):
        raise ModelFormatError(f"training matrix has shape {points.shape}, expected ({labels.shape[0]}, {d})")
    if len(doc["class_names"]) != q or (labels.size and labels.max() >= q):
        raise ModelFormatError("class names and labels do not match q")

    separators = {}
    for entry in doc["separators"]:
        pair = (entry["pair"][0], entry["pair"][1])
        terms = tuple(Monomial(tuple(e)) for e in entry["monomials"])
        if any(len(t.exponents) != q for t in terms) or len(entry["weights"]) != len(terms):
            raise ModelFormatError(f"separator {pair} does not match q={q}")
        if terms != monomials(q, entry["degree"]):
            raise ModelFormatError(
                f"separator {pair} monomials are not the degree-{entry['degree']} terms in canonical order"
            )
        separators[pair] = Separator(
            monomials=terms,
            weights=_read_vector(entry["weights"], "weights"),
            steps=[
                StepRecord(tuple(s["features"]), float(s["alpha"]), float(s["amr"]))
                for s in entry["steps"]
            ],
            degree=entry["degree"],
            pair=pair,
        )
    if len(separators) != q * (q - 1) // 2:
        raise ModelFormatError(f"expected {q * (q - 1) // 2} separators, found {len(separators)}")

    rule = doc["outsider_rule"]
    pooled = doc["pooled_scatter"]
    return Model(
        points=points,
        labels=labels,
        class_names=tuple(doc["class_names"]),
        depth_kind=DepthKind(doc["depth_kind"]),
        degree=doc["degree"],
        outsider_rule=OutsiderRule(
            kind=OutsiderKind(rule["kind"]),
            k=rule["k"],
            estimator=Estimator(rule["estimator"]),
            seed=rule["seed"],
        ),
        seed=doc["seed"],
        separators=separators,
        depth_summaries=[_location_scatter(e, "depth_summaries") for e in doc["depth_summaries"]],
        outsider_scatter=[_location_scatter(e, "outsider_scatter") for e in doc["outsider_scatter"]],
        pooled_scatter=_read_matrix(pooled, "pooled_scatter") if pooled is not None else None,
        version=doc["version"],
    )


def loads(text: str) -> Model:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"model file is not valid JSON: {e}")
    return from_document(doc)


def load_model(path: Union[str, Path]) -> Model:
    """
    Load a model file.

    Raises:
        ModelFormatError: If the file is missing, not JSON or not a valid model
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ModelFormatError(f"cannot read model file {path}: {e}")
    model = loads(text)
    logger.debug("loaded model from %s", path)
    return model
