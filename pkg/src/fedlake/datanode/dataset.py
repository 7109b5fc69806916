"""CSV ingestion into a typed in-memory table.

Rows with unparseable or missing cells are dropped and reported, not
imputed; the ingestion report lists the offending row numbers so a site
operator can fix the export.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from ..catalog import CATEGORICAL, NUMERIC_INTEGER, NUMERIC_REAL


@dataclass(frozen=True)
class ColumnDef:
    name: str
    kind: str


@dataclass
class IngestReport:
    total_rows: int = 0
    dropped: list[tuple[int, str]] = field(default_factory=list)  # (row no, reason)

    @property
    def dropped_count(self) -> int:
        return len(self.dropped)


@dataclass
class LocalDataset:
    table: str
    columns: tuple[ColumnDef, ...]
    rows: list[dict]

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> ColumnDef:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(f"unknown column: {name}")

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)


def _parse_cell(raw: str, kind: str):
    value = raw.strip()
    if value == "":
        raise ValueError("empty cell")
    if kind == CATEGORICAL:
        return value
    if kind == NUMERIC_INTEGER:
        return int(value)
    if kind == NUMERIC_REAL:
        return float(value)
    raise ValueError(f"unknown column kind: {kind}")


def ingest_csv(path, table: str, declared: list[ColumnDef]) -> tuple[LocalDataset, IngestReport]:
    """Load a UTF-8 comma-separated file whose header matches the declared
    columns.  Returns the typed dataset and a report of dropped rows."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"data file not found: {path}")
    report = IngestReport()
    rows: list[dict] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file has no header row") from None
        declared_names = [c.name for c in declared]
        if header != declared_names:
            raise ValueError(
                f"{path}: header mismatch: expected {declared_names}, got {header}"
            )
        for row_number, raw in enumerate(reader, start=2):
            report.total_rows += 1
            if len(raw) != len(declared):
                report.dropped.append((row_number, "wrong field count"))
                continue
            parsed = {}
            problem = None
            for col, cell in zip(declared, raw):
                try:
                    parsed[col.name] = _parse_cell(cell, col.kind)
                except ValueError:
                    problem = f"column {col.name}: unparseable {col.kind} cell {cell!r}"
                    break
            if problem is None:
                rows.append(parsed)
            else:
                report.dropped.append((row_number, problem))
    return LocalDataset(table=table, columns=tuple(declared), rows=rows), report
