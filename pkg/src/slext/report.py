"""Deterministic JSON/CSV reports.

Key order is fixed by construction and floats are written with 17
significant digits, so identical inputs give byte-identical files.
Non-finite floats become ``null``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ValidationError

__all__ = ["SCHEMA_VERSION", "make_report", "dumps", "format_float", "write_atomic", "csv_text",
           "load_schema"]

SCHEMA_VERSION = "1.0"


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = "%.17g" % x
    return "0" if s == "-0" else s


def _encode(obj, indent: int, level: int, out: list):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise TypeError(f"report keys must be strings, got {k!r}")
            out.append(pad + json.dumps(k) + ": ")
            _encode(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        if all(isinstance(v, (int, float, np.integer, np.floating, type(None))) and not isinstance(v, bool)
               for v in items):
            parts: list = []
            for v in items:
                _encode(v, indent, level + 1, parts)
                parts.append(", ")
            out.append("[" + "".join(parts[:-1]) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(items):
            out.append(pad)
            _encode(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "]")
    elif hasattr(obj, "value") and isinstance(obj.value, str):  # enums
        out.append(json.dumps(obj.value))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    out: list = []
    _encode(obj, indent, 0, out)
    return "".join(out) + "\n"


def make_report(command: str, inputs: dict, results, diagnostics: dict | None = None,
                timing: dict | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "version": __version__,
        "inputs": inputs,
        "results": results,
        "diagnostics": diagnostics if diagnostics is not None else {},
        "timing": timing,
    }


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        s = format_float(v)
        return "" if s == "null" else s
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_atomic(path, text: str) -> Path:
    """Write via a temporary file in the target directory and rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    except OSError as exc:
        raise ValidationError(f"cannot write to {directory}: {exc}") from None
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path


def load_schema() -> dict:
    text = resources.files("slext").joinpath("schema/report.schema.json").read_text()
    return json.loads(text)
