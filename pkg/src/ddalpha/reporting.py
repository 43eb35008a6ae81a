"""
CSV export and console tables.

Every CSV written by ddalpha starts with a comment line naming the tool
version and the seed of the run, followed by a regular header row.
"""

import csv
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO, Union

from rich.console import Console
from rich.table import Table

from ddalpha import __version__


def provenance(seed: Optional[int]) -> str:
    """Tool version and seed, as embedded in every output file."""
    return f"ddalpha {__version__} seed={seed if seed is not None else 'none'}"


def header_line(seed: Optional[int]) -> str:
    return f"# {provenance(seed)}"


def format_value(value: Any) -> str:
    """Render a cell; floats keep enough digits to be exact-reproducible."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv_stream(stream: TextIO, fieldnames: Sequence[str],
                     rows: Iterable[Dict[str, Any]], seed: Optional[int]) -> None:
    stream.write(header_line(seed) + "\n")
    writer = csv.DictWriter(stream, fieldnames=list(fieldnames), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: format_value(value) for key, value in row.items()})


def write_csv(path: Union[str, Path], fieldnames: Sequence[str],
              rows: Iterable[Dict[str, Any]], seed: Optional[int]) -> Path:
    """
    Export rows to a CSV file.

    Args:
        path: Output file
        fieldnames: Column order
        rows: One mapping per row
        seed: Seed recorded in the comment header

    Returns:
        Path of the written file
    """
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_csv_stream(f, fieldnames, rows, seed)
    return path


def render_table(title: str, columns: Sequence[str], rows: List[Sequence[Any]],
                 console: Optional[Console] = None) -> None:
    """Print a rich table of already computed values."""
    table = Table(title=title)
    for column in columns:
        table.add_column(column, justify="right" if column != columns[0] else "left")
    for row in rows:
        table.add_row(*[f"{v:.6g}" if isinstance(v, float) else str(v) for v in row])
    (console or Console()).print(table)
