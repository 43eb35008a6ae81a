"""
Tests for the YAML project configuration and its layering with flags.
"""

import pytest

from ddalpha.classifier import ClassifierConfig, Estimator, OutsiderKind
from ddalpha.config import (
    PROJECT_FILE,
    build_config,
    find_project_file,
    load_project_config,
    resolve_threads,
)
from ddalpha.depth import DepthKind
from ddalpha.errors import ConfigError


class TestProjectFile:

    def test_explicit_path_must_exist(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            find_project_file(str(tmp_path / "missing.yml"))

    def test_environment_variable(self, tmp_path, monkeypatch):
        path = tmp_path / "elsewhere.yml"
        path.write_text("degree: 3\n", encoding="utf-8")
        monkeypatch.setenv("DDALPHA_CONFIG", str(path))
        assert find_project_file() == path

    def test_working_directory(self, tmp_path, monkeypatch):
        monkeypatch.delenv("DDALPHA_CONFIG", raising=False)
        monkeypatch.chdir(tmp_path)
        assert find_project_file() is None
        (tmp_path / PROJECT_FILE).write_text("seed: 4\n", encoding="utf-8")
        assert find_project_file().name == PROJECT_FILE

    def test_load(self, tmp_path):
        path = tmp_path / PROJECT_FILE
        path.write_text("depth: mahal-mcd\noutsiders: knn-mahal\nk: 3\n", encoding="utf-8")
        assert load_project_config(path) == {"depth": "mahal-mcd", "outsiders": "knn-mahal", "k": 3}

    def test_empty_file(self, tmp_path):
        path = tmp_path / PROJECT_FILE
        path.write_text("", encoding="utf-8")
        assert load_project_config(path) == {}
        assert load_project_config(None) == {}

    @pytest.mark.parametrize("text", ["- 1\n- 2\n", "colour: red\n", "degree: [1\n"])
    def test_rejected(self, tmp_path, text):
        path = tmp_path / PROJECT_FILE
        path.write_text(text, encoding="utf-8")
        with pytest.raises(ConfigError):
            load_project_config(path)


class TestBuildConfig:

    def test_overlay(self):
        config = build_config({"depth": "mahal", "degree": 3, "outsiders": "maxdepth-mcd", "seed": 8})
        assert config.depth_kind is DepthKind.MAHALANOBIS_MOMENT
        assert config.degree == 3
        assert config.outsider_rule.kind is OutsiderKind.MAX_MAHALANOBIS_DEPTH
        assert config.outsider_rule.estimator is Estimator.MCD
        assert config.seed == 8

    def test_flags_override_project_file(self):
        project = build_config({"degree": 3, "outsiders": "knn", "k": 5})
        config = build_config({"degree": 1, "outsiders": None, "k": None}, base=project)
        assert config.degree == 1
        assert config.outsider_rule.kind is OutsiderKind.KNN_EUCLID
        assert config.outsider_rule.k == 5

    def test_k_alone_updates_rule(self):
        config = build_config({"k": 4}, base=ClassifierConfig())
        assert config.outsider_rule.k == 4

    def test_degree_candidates(self):
        assert build_config({"degree_candidates": [1, 4]}).degree_candidates == (1, 4)

    @pytest.mark.parametrize("settings", [
        {"depth": "halfspace"},
        {"degree": "two"},
        {"degree": True},
        {"outsiders": "random-mcd"},
        {"degree_candidates": []},
        {"unknown": 1},
    ])
    def test_invalid(self, settings):
        with pytest.raises(ConfigError):
            build_config(settings)


class TestThreads:

    def test_default_is_serial(self, monkeypatch):
        monkeypatch.delenv("DDALPHA_THREADS", raising=False)
        assert resolve_threads() == 0

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("DDALPHA_THREADS", "4")
        assert resolve_threads() == 4
        assert resolve_threads(2) == 2

    @pytest.mark.parametrize("raw", ["many", "-1"])
    def test_invalid_environment(self, monkeypatch, raw):
        monkeypatch.setenv("DDALPHA_THREADS", raw)
        with pytest.raises(ConfigError):
            resolve_threads()
