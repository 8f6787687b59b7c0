"""Experiment output writer.

Layout of one experiment directory::

    out/
      run_000.csv            per-round trace of repeat 0
      run_001.csv
      final_state_000.txt    final agent states of repeat 0
      mean_trace.csv         per-round averages across repeats
      summary.json

A sweep writes one such directory per value (``<param>_<value>/``) plus
``sweep_<param>.csv`` at its root. Floats are written with ``repr`` so traces
re-parse to identical values.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import re
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, Optional

import numpy as np

from pdc_mesh.engine.state import TRACE_COLUMNS, AgentState, IterationTrace, RoundRecord

logger = logging.getLogger(__name__)

SWEEP_COLUMNS: tuple[str, ...] = (
    "param_value",
    "round",
    "mean_grad_residue",
    "mean_infeasibility",
)


def format_value(value: Any) -> str:
    """Lossless text form: ``repr`` for floats, empty for None."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _parse_float(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def write_trace_csv(path: Path, records: Iterable[RoundRecord]) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_COLUMNS)
        for record in records:
            writer.writerow([format_value(v) for v in record.as_row()])
    return path


def read_trace_csv(path: Path) -> list[RoundRecord]:
    """Parse a trace CSV written by :func:`write_trace_csv`.

    Raises:
        ValueError: If the header does not match the trace columns.
    """
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"{path} is not a trace file (header {header!r})")
        records = []
        for row in reader:
            values = dict(zip(TRACE_COLUMNS, row))
            records.append(
                RoundRecord(
                    round=int(values["round"]),
                    grad_residue=float(values["grad_residue"]),
                    infeasibility=float(values["infeasibility"]),
                    consensus_gap=float(values["consensus_gap"]),
                    dx=float(values["dx"]),
                    dy=float(values["dy"]),
                    dz=float(values["dz"]),
                    inner_iters=int(values["inner_iters"]),
                    phi=_parse_float(values["phi"]),
                )
            )
    return records


def write_state_snapshot(path: Path, states: Sequence[AgentState]) -> Path:
    """One labeled line per agent field: ``agent <i> <field>: v1 v2 ...``."""
    with open(path, "w", encoding="utf-8") as f:
        for i, state in enumerate(states):
            for name in ("x", "y", "p", "z"):
                values = " ".join(format_value(float(v)) for v in getattr(state, name))
                f.write(f"agent {i} {name}: {values}".rstrip() + "\n")
    return path


def read_state_snapshot(path: Path) -> list[AgentState]:
    fields: dict[int, dict[str, np.ndarray]] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 3 or parts[0] != "agent":
                raise ValueError(f"{path}:{line_no}: malformed state line")
            agent, name = int(parts[1]), parts[2].rstrip(":")
            fields.setdefault(agent, {})[name] = np.array([float(v) for v in parts[3:]])
    return [AgentState(**fields[i]) for i in sorted(fields)]


def write_sweep_csv(path: Path, rows: Iterable[tuple[Any, int, float, float]]) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def read_sweep_csv(path: Path) -> list[tuple[float, int, float, float]]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != SWEEP_COLUMNS:
            raise ValueError(f"{path} is not a sweep file (header {header!r})")
        return [(float(v), int(r), float(g), float(i)) for v, r, g, i in reader]


def _json_safe(value: Any) -> Any:
    """Replace non-finite floats with strings so the JSON stays standard."""
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


class RunWriter:
    """Writes the files of one experiment directory.

    Attributes:
        base_dir: Experiment output directory, created on first use.

    Example:
        >>> writer = RunWriter(Path("out"))
        >>> writer.write_trace(0, trace)
        >>> writer.write_summary({"rounds": trace.rounds})
    """

    def __init__(self, base_dir: Path) -> None:
        self.base_dir = Path(base_dir)
        self.base_dir.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def slugify(text: str, max_length: int = 50) -> str:
        """Filesystem-safe form of ``text``.

        Examples:
            >>> RunWriter.slugify("alpha 0.1")
            'alpha_0.1'
            >>> RunWriter.slugify("???")
            'unnamed'
        """
        slug = re.sub(r"[^\w\s.+-]", "", text.lower())
        slug = re.sub(r"\s+", "_", slug).strip("_")
        return slug[:max_length] if slug else "unnamed"

    def child(self, param: str, value: Any) -> RunWriter:
        """Writer for the ``<param>_<value>/`` directory of a sweep point."""
        return RunWriter(self.base_dir / self.slugify(f"{param}_{format_value(value)}"))

    def run_path(self, index: int) -> Path:
        return self.base_dir / f"run_{index:03d}.csv"

    def write_trace(self, index: int, trace: IterationTrace) -> Path:
        path = write_trace_csv(self.run_path(index), trace.records)
        logger.debug("Wrote %d rounds to %s", trace.rounds, path)
        return path

    def write_final_state(self, index: int, trace: IterationTrace) -> Path:
        return write_state_snapshot(
            self.base_dir / f"final_state_{index:03d}.txt", trace.final_states
        )

    def write_mean_trace(self, records: Sequence[RoundRecord]) -> Path:
        return write_trace_csv(self.base_dir / "mean_trace.csv", records)

    def write_summary(self, data: dict[str, Any]) -> Path:
        path = self.base_dir / "summary.json"
        self._write_json_atomic(path, data)
        return path

    def write_sweep(self, param: str, rows: Iterable[tuple[Any, int, float, float]]) -> Path:
        return write_sweep_csv(self.base_dir / f"sweep_{self.slugify(param)}.csv", rows)

    def _write_json_atomic(self, path: Path, data: dict[str, Any]) -> None:
        """Write to a temporary file first, then rename over the target."""
        tmp_path = path.with_suffix(".tmp")
        with open(tmp_path, "w", encoding="utf-8") as f:
            json.dump(
                _json_safe(data), f, indent=2, sort_keys=True, ensure_ascii=False, default=str
            )
        tmp_path.replace(path)
