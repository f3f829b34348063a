"""Delimited-text and JSON-lines table writers.

CSV floats carry 17 significant digits so a table round-trips to the
same doubles. Rows are written in the order given.
"""

from __future__ import annotations

import csv
import json
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Sequence


def format_cell(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


@contextmanager
def _open(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        path = Path(path)
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            yield fh


def write_table(path, header: Sequence[str], rows: Iterable[Sequence], fmt: str = "csv") -> int:
    """Write ``rows`` under ``header``; returns the row count."""
    n = 0
    with _open(path) as fh:
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_cell(v) for v in row])
                n += 1
        elif fmt == "jsonl":
            for row in rows:
                fh.write(json.dumps({k: _jsonable(v) for k, v in zip(header, row)}) + "\n")
                n += 1
        else:
            raise ValueError(f"unknown format {fmt!r}")
    return n


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        table = list(csv.reader(fh))
    return table[0], table[1:]
