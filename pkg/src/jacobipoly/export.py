"""CSV and JSON emission shared by tables, reports and the command line.

JSON numbers are written with ``repr``, the shortest text that reads back
to the same double (never more than 17 significant digits).  CSV numbers
use 12 significant digits.  Non-finite values become ``null`` in JSON and
``nan``/``inf`` in CSV.
"""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

CSV_DIGITS = 12


def plain(obj):
    """Convert numpy containers and scalars into JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(meta, data, indent=2):
    return json.dumps({"meta": plain(meta), "data": plain(data)}, indent=indent, sort_keys=False, allow_nan=False)


def csv_number(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.{CSV_DIGITS}g}"


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([csv_number(v) if isinstance(v, (int, float, np.integer, np.floating)) else v for v in row])
    return buf.getvalue()
