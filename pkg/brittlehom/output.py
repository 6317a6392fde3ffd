"""Atomic JSON and CSV writers for reports and traces."""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

TRACE_COLUMNS = [
    "t_or_eps",
    "g_hat_or_total",
    "bulk",
    "surface",
    "crack_measure",
    "n_bad",
]


def canonical(obj: Any) -> Any:
    """
    Convert numpy values to plain Python, floats kept at 17 significant digits.

    Non-finite floats become None so reports stay strict JSON.
    """
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return canonical(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return None
        return float(f"{float(obj):.17g}")
    return obj


def _atomic_write(path: str | Path, prefix: str, write) -> None:
    out_path = str(path)
    tmp_dir = os.path.dirname(os.path.abspath(out_path)) or "."
    os.makedirs(tmp_dir, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(
        prefix=prefix, suffix=".tmp", dir=tmp_dir, text=True
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            write(f)
        os.replace(tmp_path, out_path)
    except BaseException:
        try:
            os.remove(tmp_path)
        except OSError:
            pass
        raise


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return value


def dumps(data: Any) -> str:
    return json.dumps(canonical(data), indent=2, sort_keys=True) + "\n"


def write_json(path: str | Path, data: Any) -> None:
    """Write data as sorted, indented JSON; the target is replaced atomically."""
    text = dumps(data)
    _atomic_write(path, ".report_", lambda f: f.write(text))


def write_csv(
    path: str | Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]
) -> None:
    """Write rows under a header; floats use 17 significant digits."""
    rows = [[_cell(v) for v in row] for row in rows]

    def write(f):
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)

    _atomic_write(path, ".trace_", write)


def write_trace(path: str | Path, rows: Iterable[Sequence[Any]]) -> None:
    write_csv(path, TRACE_COLUMNS, rows)
