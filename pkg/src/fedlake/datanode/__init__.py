"""Autonomous hospital data node: local data, local compute, no raw export."""

from .dataset import ColumnDef, IngestReport, LocalDataset, ingest_csv
from .node import (
    BusyError,
    DataNode,
    ModelLogEntry,
    NodeError,
    TrainingCache,
)

__all__ = [
    "ColumnDef",
    "IngestReport",
    "LocalDataset",
    "ingest_csv",
    "DataNode",
    "TrainingCache",
    "ModelLogEntry",
    "NodeError",
    "BusyError",
]
