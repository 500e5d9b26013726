"""Small file helpers: atomic writes and delimited text."""

from __future__ import annotations

import csv
import os

import numpy as np


def atomic_write_text(path: str, text: str) -> None:
    """Write text to path via a temp file and rename, never a partial file."""
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path: str, header: list[str], rows) -> None:
    """Plain CSV with repr-formatted floats (shortest round-trip form)."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_csv_columns(path: str) -> dict[str, np.ndarray]:
    """Header-keyed float columns of a CSV written by write_csv."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        cols: list[list[float]] = [[] for _ in header]
        for row in reader:
            if len(row) != len(header):
                raise ValueError(f"{path}: ragged row {reader.line_num}")
            for cell, col in zip(row, cols):
                col.append(float(cell))
    return {name: np.asarray(col) for name, col in zip(header, cols)}
