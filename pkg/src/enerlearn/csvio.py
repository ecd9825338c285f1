"""Deterministic CSV serialization helpers shared by all modules.

Every CSV this package emits must be byte-identical across runs for a fixed
(config, seed), so floats are written with a fixed format and rows always
use LF line endings regardless of platform.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence


def fmt(value) -> str:
    """Render a cell; floats get 17 significant digits (round-trip safe)."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader if row]
