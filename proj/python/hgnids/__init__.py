"""Hypergraph analytics and ensemble intrusion detection over network flows."""

from ._core import (
    DataError,
    FlowRecord,
    Hypergraph,
    InvariantError,
    TreeModel,
    UsageError,
    build_matrix,
    cli,
    detect_window,
    detector_skip_interval,
    evaluate_labels,
    feature_skip_interval,
    ingest_csv,
    s_schedule,
    simulate,
    synth_traffic,
    train,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "FlowRecord",
    "Hypergraph",
    "InvariantError",
    "TreeModel",
    "UsageError",
    "build_matrix",
    "cli",
    "detect_window",
    "detector_skip_interval",
    "evaluate_labels",
    "feature_skip_interval",
    "ingest_csv",
    "s_schedule",
    "simulate",
    "synth_traffic",
    "train",
    "write_csv",
]
