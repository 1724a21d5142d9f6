"""Run reports and delimited output shared by the command-line tools."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["RunReport", "fmt", "write_csv", "read_csv"]


def fmt(value, digits: int = 6) -> str:
    """Human-facing number formatting (6 significant digits)."""
    if value is None:
        return "-"
    if isinstance(value, (bool, np.bool_)):
        return "yes" if value else "no"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return f"{value:.{digits}g}"
    return str(value)


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if math.isnan(value) else value
    return value


@dataclass
class RunReport:
    """Everything needed to re-run a command and compare its output."""

    command: str
    parameters: dict
    results: list
    summary: dict = field(default_factory=dict)
    parameters_mhz: dict | None = None
    tolerances: dict = field(default_factory=dict)
    wall_time: float = 0.0
    seed: int | None = None
    flags: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 1 if self.flags else 0

    def to_json(self) -> str:
        return json.dumps(_plain(asdict(self)), indent=2)

    def render(self) -> str:
        lines = [f"# {self.command}"]
        lines.append("# parameters (Gamma units): " + ", ".join(
            f"{k}={fmt(v)}" for k, v in self.parameters.items()))
        if self.parameters_mhz:
            lines.append("# parameters (MHz / us): " + ", ".join(
                f"{k}={fmt(v)}" for k, v in self.parameters_mhz.items()))
        if self.seed is not None:
            lines.append(f"# seed: {self.seed}")
        if self.tolerances:
            lines.append("# tolerances: " + ", ".join(
                f"{k}={fmt(v)}" for k, v in self.tolerances.items()))
        for note in self.notes:
            lines.append(f"# {note}")
        if self.results:
            columns = list(dict.fromkeys(k for row in self.results for k in row))
            table = [[fmt(row.get(c)) for c in columns] for row in self.results]
            widths = [max(len(c), *(len(r[i]) for r in table)) for i, c in enumerate(columns)]
            lines.append("  ".join(c.rjust(w) for c, w in zip(columns, widths)))
            for r in table:
                lines.append("  ".join(v.rjust(w) for v, w in zip(r, widths)))
        for key, value in self.summary.items():
            lines.append(f"{key} = {fmt(value)}")
        for flag in self.flags:
            lines.append(f"! {flag}")
        lines.append(f"# wall time: {self.wall_time:.3f} s")
        return "\n".join(lines)


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def write_csv(path, header, rows) -> Path:
    """Write rows (sequences or dicts keyed by ``header``) with 12 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            if isinstance(row, dict):
                row = [row.get(h) for h in header]
            writer.writerow([_csv_cell(v) for v in row])
    return path


def read_csv(path) -> list[dict]:
    """Read a CSV written by :func:`write_csv`, converting numeric cells to float."""
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {}
            for k, v in row.items():
                try:
                    parsed[k] = float(v)
                except ValueError:
                    parsed[k] = v
            out.append(parsed)
    return out
