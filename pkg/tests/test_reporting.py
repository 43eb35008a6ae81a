"""
Tests for CSV export and console tables.
"""

import io

from rich.console import Console

from ddalpha import __version__
from ddalpha.reporting import format_value, header_line, provenance, render_table, write_csv, write_csv_stream


def test_header_line():
    assert header_line(7) == f"# ddalpha {__version__} seed=7"
    assert header_line(None).endswith("seed=none")
    assert provenance(7) == f"ddalpha {__version__} seed=7"


def test_format_value():
    assert format_value(True) == "1"
    assert format_value(0.1) == "0.10000000000000001"
    assert float(format_value(1 / 3)) == 1 / 3
    assert format_value(12) == "12"


def test_write_csv(tmp_path):
    path = write_csv(tmp_path / "out.csv", ["a", "b"], [{"a": 1, "b": 0.5}, {"a": 2, "b": False}], seed=3)
    assert path.read_text(encoding="utf-8") == f"# ddalpha {__version__} seed=3\na,b\n1,0.5\n2,0\n"


def test_stream_matches_file(tmp_path):
    stream = io.StringIO()
    rows = [{"x": "p,q"}]
    write_csv_stream(stream, ["x"], rows, seed=None)
    assert stream.getvalue() == write_csv(tmp_path / "x.csv", ["x"], rows, None).read_text(encoding="utf-8")
    assert '"p,q"' in stream.getvalue()


def test_render_table():
    console = Console(file=io.StringIO(), width=80)
    render_table("Times", ["d", "mean"], [[5, 0.123456789]], console=console)
    text = console.file.getvalue()
    assert "Times" in text
    assert "0.123457" in text
