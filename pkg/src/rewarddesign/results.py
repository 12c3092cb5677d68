"""Versioned CSV files: a ``# schema: <name> v<version>`` line, then a header row."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence, Union

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    pass


def write_csv(path: Union[str, Path], schema: str, columns: Sequence[str],
              rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# schema: {schema} v{SCHEMA_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)
    return path


def read_csv(path: Union[str, Path], schema: str, columns: Sequence[str]) -> list[dict]:
    with Path(path).open(newline="") as fh:
        first = fh.readline().strip()
        expected = f"# schema: {schema} v{SCHEMA_VERSION}"
        if first != expected:
            raise SchemaError(f"{path}: expected {expected!r}, found {first!r}")
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != tuple(columns):
            raise SchemaError(f"{path}: columns {reader.fieldnames} != {list(columns)}")
        return list(reader)
