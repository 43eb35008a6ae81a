"""
Tests for the ddalpha command line interface.
"""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from ddalpha import __version__
from ddalpha.cli import main
from ddalpha.depth import LabeledDataset

from tests.conftest import write_dataset_csv


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    """Run every command in an empty directory without ambient configuration."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("DDALPHA_CONFIG", raising=False)
    monkeypatch.delenv("DDALPHA_THREADS", raising=False)


class TestCLICommands:

    def setup_method(self):
        self.runner = CliRunner()

    def invoke(self, *args):
        return self.runner.invoke(main, [str(a) for a in args])

    def train(self, data, out, *extra):
        result = self.invoke("train", "--data", data, "--label", "class", "--out", out, *extra)
        assert result.exit_code == 0, result.output
        return result

    def test_version(self):
        result = self.invoke("--version")
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_train_is_deterministic(self, clouds_csv, tmp_path):
        self.train(clouds_csv, tmp_path / "a.json")
        result = self.train(clouds_csv, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert "Model written" in result.output

    def test_predict(self, clouds_csv, tmp_path):
        model = tmp_path / "model.json"
        self.train(clouds_csv, model, "--seed", "5")
        out = tmp_path / "predictions.csv"
        result = self.invoke("predict", "--model", model, "--data", clouds_csv, "--label", "class",
                             "--out", out)
        assert result.exit_code == 0, result.output
        assert "AMR against column 'class': 0.000000" in result.output
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == f"# ddalpha {__version__} seed=5"
        assert lines[1] == "row,label,votes,outsider,depth_a,depth_b"
        assert len(lines) == 2 + 60
        assert lines[2].split(",")[2] == "1;0"

        again = tmp_path / "again.csv"
        self.invoke("predict", "--model", model, "--data", clouds_csv, "--label", "class", "--out", again)
        assert out.read_bytes() == again.read_bytes()

    def test_predict_single_far_point(self, clouds_csv, tmp_path):
        model = tmp_path / "model.json"
        self.train(clouds_csv, model)
        data = tmp_path / "one.csv"
        data.write_text("f1,f2\n100.0,100.0\n", encoding="utf-8")
        out = tmp_path / "one_out.csv"
        result = self.invoke("predict", "--model", model, "--data", data, "--out", out)
        assert result.exit_code == 0, result.output
        assert "Classified 1 point(s), 1 outsider(s)" in result.output
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 3
        row = lines[2].split(",")
        assert row[1] in ("a", "b")
        assert row[2] == "0;0"
        assert float(row[4]) == 0.0 and float(row[5]) == 0.0

    def test_predict_dimension_mismatch(self, clouds_csv, tmp_path):
        model = tmp_path / "model.json"
        self.train(clouds_csv, model)
        wide = tmp_path / "wide.csv"
        wide.write_text("f1,f2,f3\n1,2,3\n", encoding="utf-8")
        result = self.invoke("predict", "--model", model, "--data", wide, "--out", tmp_path / "p.csv")
        assert result.exit_code == 2
        assert "SchemaMismatch" in result.output

    def test_corrupt_model(self, clouds_csv, tmp_path):
        model = tmp_path / "model.json"
        model.write_text(json.dumps({"format": "ddalpha-model"}), encoding="utf-8")
        result = self.invoke("predict", "--model", model, "--data", clouds_csv, "--out", tmp_path / "p.csv")
        assert result.exit_code == 2

    def test_missing_label_column(self, clouds_csv, tmp_path):
        result = self.invoke("train", "--data", clouds_csv, "--label", "species", "--out", tmp_path / "m.json")
        assert result.exit_code == 2
        assert "species" in result.output

    def test_too_few_points(self, tmp_path, rng):
        points = rng.standard_normal((12, 2))
        ds = LabeledDataset(points, np.array([0] * 10 + [1] * 2), ("a", "b"))
        data = write_dataset_csv(tmp_path / "small.csv", ds)
        result = self.invoke("train", "--data", data, "--label", "class", "--out", tmp_path / "m.json")
        assert result.exit_code == 3
        assert "TooFewPoints" in result.output

    def test_project_file_and_flags(self, clouds_csv, tmp_path):
        (tmp_path / "ddalpha.yml").write_text("degree: 1\noutsiders: knn\nk: 3\n", encoding="utf-8")
        self.train(clouds_csv, tmp_path / "m.json")
        doc = json.loads((tmp_path / "m.json").read_text(encoding="utf-8"))
        assert doc["degree"] == 1
        assert doc["outsider_rule"]["kind"] == "knn"
        assert doc["outsider_rule"]["k"] == 3

        self.train(clouds_csv, tmp_path / "m3.json", "--degree", "3")
        assert json.loads((tmp_path / "m3.json").read_text(encoding="utf-8"))["degree"] == 3

    def test_bad_project_file(self, clouds_csv, tmp_path):
        bad = tmp_path / "bad.yml"
        bad.write_text("colour: red\n", encoding="utf-8")
        result = self.invoke("--config", bad, "train", "--data", clouds_csv, "--label", "class",
                             "--out", tmp_path / "m.json")
        assert result.exit_code == 2

    def test_ddplot(self, clouds_csv, tmp_path):
        model = tmp_path / "model.json"
        self.train(clouds_csv, model)
        out, curve, svg = tmp_path / "dd.csv", tmp_path / "curve.csv", tmp_path / "dd.svg"
        result = self.invoke("ddplot", "--model", model, "--data", clouds_csv, "--label", "class",
                             "--out", out, "--curve-out", curve, "--svg", svg)
        assert result.exit_code == 0, result.output
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == f"# ddalpha {__version__} seed=0"
        assert lines[1] == "depth_a,depth_b,label,outsider,hull_vertex"
        assert len(lines) == 62
        assert curve.read_text(encoding="utf-8").splitlines()[1] == "index,depth_a,depth_b"
        text = svg.read_text(encoding="utf-8")
        assert text.startswith("<svg")
        assert f"<!-- ddalpha {__version__} seed=0 -->" in text

    def test_simulate_is_reproducible(self, tmp_path):
        args = ["simulate", "--setting", "7", "--reps", "2", "--n-train", "15", "--n-test", "10",
                "--degree", "1", "--seed", "3"]
        first = self.invoke(*args, "--out", tmp_path / "a.csv", "--summary-out", tmp_path / "s.csv")
        assert first.exit_code == 0, first.output
        self.invoke(*args, "--out", tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        lines = (tmp_path / "a.csv").read_text(encoding="utf-8").splitlines()
        assert lines[:2] == [f"# ddalpha {__version__} seed=3", "setting,replication,amr"]
        assert len(lines) == 4
        assert len((tmp_path / "s.csv").read_text(encoding="utf-8").splitlines()) == 2 + 7

    def test_simulate_rejects_unknown_setting(self, tmp_path):
        result = self.invoke("simulate", "--setting", "0", "--out", tmp_path / "a.csv")
        assert result.exit_code == 2

    def test_simulate_failure_exit_code(self, tmp_path):
        result = self.invoke("simulate", "--setting", "1", "--reps", "1", "--n-train", "2",
                             "--n-test", "5", "--out", tmp_path / "a.csv")
        assert result.exit_code == 4
        assert "replication 0" in result.output

    def test_bench_single_cell(self, tmp_path):
        out = tmp_path / "bench.csv"
        result = self.invoke("bench", "--grid", "d=2 n=20", "--reps", "1", "--degree", "1", "--out", out)
        assert result.exit_code == 0, result.output
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[1] == "d,n,mean_s,sd_s,repetitions"
        assert len(lines) == 3
        assert lines[2].startswith("2,20,")

    def test_bench_bad_grid(self, tmp_path):
        result = self.invoke("bench", "--grid", "d=5", "--reps", "1", "--out", tmp_path / "b.csv")
        assert result.exit_code == 2

    def test_evaluate_compare(self, clouds_csv, tmp_path):
        out = tmp_path / "eval.csv"
        result = self.invoke("evaluate", "--data", clouds_csv, "--label", "class", "--scheme", "kfold",
                             "--folds", "3", "--degree", "1", "--compare", "random", "--compare", "knn",
                             "--out", out)
        assert result.exit_code == 0, result.output
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[1] == "rule,metric,truth,predicted,value"
        assert {line.split(",")[0] for line in lines[2:]} == {"random", "knn"}
        assert "AMR:             0.0000" in result.output

    def test_evaluate_train_test_needs_size(self, clouds_csv, tmp_path):
        result = self.invoke("evaluate", "--data", clouds_csv, "--label", "class", "--scheme", "train-test",
                             "--out", tmp_path / "e.csv")
        assert result.exit_code == 2
