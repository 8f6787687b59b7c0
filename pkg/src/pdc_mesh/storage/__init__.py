"""Trace, state snapshot and summary files of experiments."""

from pdc_mesh.storage.trace_writer import (
    SWEEP_COLUMNS,
    RunWriter,
    format_value,
    read_state_snapshot,
    read_sweep_csv,
    read_trace_csv,
    write_state_snapshot,
    write_sweep_csv,
    write_trace_csv,
)

__all__ = [
    "SWEEP_COLUMNS",
    "RunWriter",
    "format_value",
    "read_state_snapshot",
    "read_sweep_csv",
    "read_trace_csv",
    "write_state_snapshot",
    "write_sweep_csv",
    "write_trace_csv",
]
