"""Delimited output writers with atomic replace and embedded provenance.

Every text output starts with '# config: <canonical json>' so a file is
traceable to the exact resolved experiment that produced it; re-running the
same config byte-reproduces the file. Writes go to a temp file in the target
directory followed by os.replace, so readers never observe partial output.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np


def canonical_json(obj) -> str:
    """Deterministic single-line JSON (sorted keys, no float repr surprises)."""

    def default(o):
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, Path):
            return str(o)
        raise TypeError(f"not JSON-serializable: {type(o)}")

    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=default)


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_csv(path: Path, header: str, rows, meta: dict) -> None:
    """Write '# config: ...' + header + rows (each row an iterable of cells)."""
    lines = [f"# config: {canonical_json(meta)}", header]
    for row in rows:
        lines.append(",".join(_fmt(c) if isinstance(c, float) else str(c) for c in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path: Path, payload: dict, meta: dict) -> None:
    doc = {"config": meta, **payload}
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True,
                                       default=lambda o: _json_default(o)) + "\n")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON-serializable: {type(o)}")


def spikes_rows(run) -> list:
    """Rows for the spike CSV: neuron_id, spike_index, time_ms."""
    rows = []
    for tr in run.trains:
        for idx, t in enumerate(tr.times):
            rows.append((tr.neuron_id, idx, float(t)))
    return rows


def raster_rows(run, k: int, n: int, pad_ms: float = 1.0) -> list:
    """Rows (neuron_id, time_ms) restricted to burst n's window, padded."""
    from .metrics import _burst_matrix

    mat = _burst_matrix(run, k, n)
    lo, hi = mat.min() - pad_ms, mat.max() + pad_ms
    rows = []
    for tr in run.trains:
        for t in tr.times[(tr.times >= lo) & (tr.times <= hi)]:
            rows.append((tr.neuron_id, float(t)))
    return rows
