"""
Tests for reading dataset CSV files.
"""

import numpy as np
import pytest

from ddalpha.datasets import load_dataset, read_dataset
from ddalpha.errors import DatasetParseError, SchemaMismatch


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestReadDataset:

    def test_labels_by_first_appearance(self, tmp_path):
        path = write(tmp_path, "x,species,y\n1.0,setosa,2\n3,versicolor,4.5\n-1e-3,setosa,0\n")
        ds = load_dataset(path, "species")
        assert ds.class_names == ("setosa", "versicolor")
        assert ds.labels.tolist() == [0, 1, 0]
        np.testing.assert_array_equal(ds.points, [[1.0, 2.0], [3.0, 4.5], [-0.001, 0.0]])

    def test_comments_and_blank_lines(self, tmp_path):
        path = write(tmp_path, "# ddalpha 0.1.0 seed=1\na,b,class\n\n1,2,p\n# note\n3,4,q\n")
        parsed = read_dataset(path, "class")
        assert parsed.feature_names == ("a", "b")
        assert parsed.labels == ["p", "q"]

    def test_without_label_column(self, tmp_path):
        parsed = read_dataset(write(tmp_path, "a,b\n1,2\n3,4\n"))
        assert parsed.labels is None
        assert parsed.d == 2
        with pytest.raises(DatasetParseError, match="no label column"):
            parsed.to_dataset()

    def test_label_column_dropped_from_features(self, clouds_csv, separated_clouds):
        parsed = read_dataset(clouds_csv, "class", expected_d=2)
        assert parsed.feature_names == ("f1", "f2")
        np.testing.assert_array_equal(parsed.points, separated_clouds.points)

    def test_missing_label_column(self, tmp_path):
        with pytest.raises(DatasetParseError) as info:
            read_dataset(write(tmp_path, "a,b\n1,2\n"), "class")
        assert info.value.column == "class"

    def test_bad_number_names_row_and_column(self, tmp_path):
        path = write(tmp_path, "a,b,class\n1,2,p\n3,oops,q\n")
        with pytest.raises(DatasetParseError) as info:
            read_dataset(path, "class")
        assert info.value.row == 2
        assert info.value.column == "b"
        assert "oops" in str(info.value)

    def test_rows_count_data_lines_only(self, tmp_path):
        path = write(tmp_path, "# header comment\na,b,class\n\n1,2,p\n# note\n3,4,q\n5,inf,q\n")
        with pytest.raises(DatasetParseError, match="finite") as info:
            read_dataset(path, "class")
        assert info.value.row == 3
        assert info.value.column == "b"

    def test_repr_floats_are_exact(self, tmp_path):
        values = [0.1, 1.0 / 3.0, -2.5e-17, 123456789.123456789]
        text = "x,class\n" + "".join(f"{v!r},c\n" for v in values)
        parsed = read_dataset(write(tmp_path, text), "class")
        assert parsed.points[:, 0].tolist() == values

    @pytest.mark.parametrize("text", [
        "a,b,class\n1,2\n",
        "a,b,class\n1,2,p,extra\n",
        "a,b,class\n1,2,\n",
        "a,b,class\n1,nan,p\n",
        "a,b,class\n",
        "a,a,class\n1,2,p\n",
        "class\np\n",
    ])
    def test_malformed(self, tmp_path, text):
        with pytest.raises(DatasetParseError):
            read_dataset(write(tmp_path, text), "class")

    def test_empty_file(self, tmp_path):
        with pytest.raises(DatasetParseError, match="empty"):
            read_dataset(write(tmp_path, "# only a comment\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetParseError, match="cannot read"):
            read_dataset(tmp_path / "absent.csv")

    def test_dimension_mismatch(self, tmp_path):
        with pytest.raises(SchemaMismatch):
            read_dataset(write(tmp_path, "a,b,c\n1,2,3\n"), expected_d=2)
