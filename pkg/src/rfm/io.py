"""CSV/JSON readers and writers shared by the command line front end.

Datasets are headerless numeric CSV, one observation per row.  Functional
datasets carry the grid in their first row.  Written files start with
``# key=value`` comment lines echoing the run configuration, which numpy's
``loadtxt`` skips.
"""
from __future__ import annotations

import csv
import io
import json

import numpy as np


def read_dataset_csv(path) -> np.ndarray:
    X = np.loadtxt(path, delimiter=",", ndmin=2)
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{path}: non-finite values")
    return X


def fmt(x) -> str:
    """Shortest round-tripping text for a number."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


def _meta_lines(meta: dict) -> list[str]:
    return [f"# {k}={fmt(v) if not isinstance(v, (list, tuple)) else ';'.join(map(fmt, v))}"
            for k, v in meta.items()]


def table_csv(rows: list[dict], meta: dict) -> str:
    buf = io.StringIO()
    for line in _meta_lines(meta):
        buf.write(line + "\n")
    cols = []
    for row in rows:
        cols.extend(c for c in row if c not in cols)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([fmt(row[c]) if c in row else "" for c in cols])
    return buf.getvalue()


def matrix_csv(rows, meta: dict) -> str:
    buf = io.StringIO()
    for line in _meta_lines(meta):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    for row in np.atleast_2d(rows):
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def emit(text: str, path=None):
    if path is None or str(path) == "-":
        import sys
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
