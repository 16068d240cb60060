"""Delimited outputs and run metadata.

CSV files carry an optional `#`-comment header, a `name,name` header row and
one row per point with 12 significant digits, newline terminated.  Every run
directory also gets a metadata JSON with the full configuration and seed, which
is sufficient to reproduce all numeric outputs bit-for-bit within one build.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np


def _atomic_write_text(path, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def format_value(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def write_series_csv(path, names: tuple[str, str], rows, comments=()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(names))
    for x, y in rows:
        lines.append(f"{format_value(x)},{format_value(y)}")
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_series_csv(path):
    """Returns (names, rows ndarray of shape (k, 2), comments)."""
    comments, names, rows = [], None, []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line[1:].strip())
            elif names is None:
                names = tuple(line.split(","))
            else:
                a, b = line.split(",")
                rows.append((float(a), float(b)))
    if names is None:
        raise ValueError(f"{path}: no header row")
    return names, np.array(rows, dtype=np.float64).reshape(-1, 2), comments


def write_table_csv(path, names, rows, comments=()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(names))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path, obj) -> None:
    _atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


@dataclass
class RunMetadata:
    command: str
    config: dict
    seed: int
    version: str
    gate_counts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    def write(self, path) -> None:
        write_json(path, self.__dict__)


class StopWatch:
    def __init__(self):
        self.t0 = time.perf_counter()

    def lap(self) -> float:
        now = time.perf_counter()
        dt, self.t0 = now - self.t0, now
        return dt
