"""Deterministic JSON and CSV output.

Floats are written with 12 significant digits, keys are sorted and nothing
time-dependent is recorded, so equal inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math

import numpy as np

from . import __version__

SCHEMA = "dgl/1"
SIG_DIGITS = 12


def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG_DIGITS}g}"


def _plain(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = obj.as_dict() if hasattr(obj, "as_dict") else dataclasses.asdict(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return fmt_float(x)
        return float(fmt_float(x))
    return obj


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def envelope(kind, body, settings=None, inputs=None, extra=None) -> dict:
    """Wrap a report body with schema, version, settings and input hashes."""
    doc = {
        "schema": SCHEMA,
        "kind": kind,
        "version": __version__,
        "settings": settings.as_dict() if hasattr(settings, "as_dict") else (settings or {}),
        "inputs": {str(k): file_sha256(v) for k, v in sorted((inputs or {}).items())},
        "result": body,
    }
    if extra:
        doc.update(extra)
    return doc


def dumps_json(doc) -> str:
    return json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n"


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def dumps_csv(rows, columns, meta=None) -> str:
    """CSV text; ``meta`` becomes leading ``# key=value`` comment lines."""
    out = io.StringIO()
    if meta:
        for key in sorted(meta):
            out.write(f"# {key}={json.dumps(_plain(meta[key]), sort_keys=True)}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        d = row.as_dict() if hasattr(row, "as_dict") else row
        writer.writerow([_cell(d.get(c)) for c in columns])
    return out.getvalue()
