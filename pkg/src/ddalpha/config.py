"""
Project configuration.

Settings are layered: built-in ``ClassifierConfig`` defaults, then an optional
``ddalpha.yml`` project file, then command line flags. The project file is
found through ``--config``, the ``DDALPHA_CONFIG`` environment variable or the
working directory, in that order.

Example ``ddalpha.yml``::

    depth: zonoid
    degree: 2
    outsiders: knn-mahal
    k: 1
    seed: 0
"""

import logging
import os
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from ddalpha.classifier import ClassifierConfig, OutsiderRule
from ddalpha.depth import DepthKind
from ddalpha.errors import ConfigError

logger = logging.getLogger(__name__)

PROJECT_FILE = "ddalpha.yml"
CONFIG_ENV = "DDALPHA_CONFIG"
THREADS_ENV = "DDALPHA_THREADS"

KNOWN_KEYS = {
    "depth", "degree", "outsiders", "k", "seed", "degree_cv", "degree_candidates",
    "cv_folds", "knn_cv", "knn_max_k", "mcd_restarts", "threads",
}


def find_project_file(explicit: Optional[str] = None) -> Optional[Path]:
    """Locate the project file; an explicit path must exist."""
    if explicit:
        path = Path(explicit)
        if not path.is_file():
            raise ConfigError(f"configuration file not found: {path}")
        return path
    from_env = os.environ.get(CONFIG_ENV)
    if from_env:
        path = Path(from_env)
        if not path.is_file():
            raise ConfigError(f"{CONFIG_ENV} points at a missing file: {path}")
        return path
    local = Path.cwd() / PROJECT_FILE
    return local if local.is_file() else None


def load_project_config(path: Optional[Path]) -> Dict[str, Any]:
    """
    Read the YAML project file.

    Returns:
        Mapping of recognised keys (empty without a file)

    Raises:
        ConfigError: On YAML errors, a non-mapping document or unknown keys
    """
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse {path}: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping, got {type(data).__name__}")
    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration key(s) in {path}: {', '.join(unknown)}")
    logger.debug("loaded project configuration from %s", path)
    return data


def _int(settings: Dict[str, Any], key: str, default: int) -> int:
    value = settings.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}")
    return value


def build_config(settings: Dict[str, Any], base: Optional[ClassifierConfig] = None) -> ClassifierConfig:
    """
    Overlay ``settings`` (project file keys or CLI flags) on ``base``.

    Keys whose value is None are ignored so unset CLI flags keep the
    project file's values.
    """
    base = base or ClassifierConfig()
    settings = {key: value for key, value in settings.items() if value is not None}
    unknown = sorted(set(settings) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")

    depth_kind = base.depth_kind
    if "depth" in settings:
        try:
            depth_kind = DepthKind(str(settings["depth"]))
        except ValueError:
            raise ConfigError(f"unknown depth '{settings['depth']}'")

    rule = base.outsider_rule
    k = _int(settings, "k", rule.k)
    seed = settings.get("seed", base.seed)
    if "outsiders" in settings:
        rule = OutsiderRule.parse(str(settings["outsiders"]), k=k, seed=rule.seed)
    elif k != rule.k:
        rule = replace(rule, k=k)

    candidates = settings.get("degree_candidates", base.degree_candidates)
    if not isinstance(candidates, (list, tuple)) or not candidates:
        raise ConfigError(f"'degree_candidates' must be a non-empty list, got {candidates!r}")

    return ClassifierConfig(
        depth_kind=depth_kind,
        degree=_int(settings, "degree", base.degree),
        outsider_rule=rule,
        seed=_int({"seed": seed}, "seed", base.seed),
        degree_cv=bool(settings.get("degree_cv", base.degree_cv)),
        degree_candidates=tuple(int(p) for p in candidates),
        cv_folds=_int(settings, "cv_folds", base.cv_folds),
        knn_cv=bool(settings.get("knn_cv", base.knn_cv)),
        knn_max_k=_int(settings, "knn_max_k", base.knn_max_k),
        mcd_restarts=_int(settings, "mcd_restarts", base.mcd_restarts),
        threads=_int(settings, "threads", base.threads),
    )


def resolve_threads(explicit: Optional[int] = None) -> int:
    """Thread cap from an explicit value or ``DDALPHA_THREADS``; 0 means serial."""
    if explicit is not None:
        return explicit
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 0
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got '{raw}'")
    if threads < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0, got {threads}")
    return threads
