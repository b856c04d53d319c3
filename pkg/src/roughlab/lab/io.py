"""Table output: CSV written row by row, or one JSON document.

Floats are written with 17 significant digits so values round-trip.
"""

import csv
import json
import math
import sys

import numpy as np


def fmt_value(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return "" if v is None else str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


class TableWriter:
    """Context manager writing one table to ``path`` (stdout if None).

    CSV rows are flushed as they arrive, so a failing run leaves every
    completed row on disk. JSON is written once, on close, including any
    rows gathered before a failure.
    """

    def __init__(self, path, columns, fmt="csv", meta=None):
        self.path = path
        self.columns = list(columns)
        self.fmt = fmt
        self.meta = dict(meta or {})
        self.rows = []
        self._fh = None
        self._csv = None

    def __enter__(self):
        if self.path is None:
            self._fh = sys.stdout
        else:
            self._fh = open(self.path, "w", encoding="utf-8", newline="")
        if self.fmt == "csv":
            self._csv = csv.writer(self._fh, lineterminator="\n")
            self._csv.writerow(self.columns)
            self._fh.flush()
        return self

    def write(self, row):
        row = list(row)
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} fields, table has {len(self.columns)} columns")
        self.rows.append(row)
        if self._csv is not None:
            self._csv.writerow([fmt_value(v) for v in row])
            self._fh.flush()

    def write_all(self, rows):
        for row in rows:
            self.write(row)

    def __exit__(self, exc_type, exc, tb):
        try:
            if self.fmt == "json":
                doc = {"columns": self.columns,
                       "rows": [[_json_value(v) for v in r] for r in self.rows],
                       "meta": {k: _json_value(v) for k, v in self.meta.items()},
                       "complete": exc_type is None}
                json.dump(doc, self._fh, indent=1)
                self._fh.write("\n")
            self._fh.flush()
        finally:
            if self._fh is not sys.stdout:
                self._fh.close()
        return False
