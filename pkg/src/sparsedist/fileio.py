"""Function files and CSV tables.

A function file is JSON: ``{"n": 2, "m": 2, "entries": [{"x": [1, 0], "v": 0.5}]}``.
Unlisted points are zero.
"""

import csv
import io
import json

import numpy as np

from .lattice import LatticeDomain
from .projection import as_function


def dump_function(f):
    idx = np.flatnonzero(f.values)
    entries = [{"x": [int(c) for c in f.domain.unrank(i)], "v": float(f.values[i])}
               for i in idx]
    return json.dumps({"n": f.domain.n, "m": f.domain.m, "entries": entries}, indent=1) + "\n"


def load_function(text):
    """Parse a function file; returns a Distribution when the values form one."""
    try:
        doc = json.loads(text)
        domain = LatticeDomain(int(doc["n"]), int(doc["m"]))
        entries = doc["entries"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"malformed function file: {exc}") from exc
    v = np.zeros(domain.size)
    for e in entries:
        v[domain.rank(e["x"])] += float(e["v"])
    return as_function(domain, v)


def write_function(path, f):
    with open(path, "w") as fh:
        fh.write(dump_function(f))


def read_function(path):
    with open(path) as fh:
        return load_function(fh.read())


def format_cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def table_to_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_cell(row[c]) for c in columns])
    return buf.getvalue()


def _parse_cell(cell):
    for kind in (int, float):
        try:
            return kind(cell)
        except ValueError:
            pass
    return cell


def table_from_csv(text):
    """Read a table back as (columns, rows) with numeric cells parsed."""
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    rows = []
    for rec in reader:
        row = {}
        for c, cell in zip(columns, rec):
            row[c] = _parse_cell(cell)
        rows.append(row)
    return columns, rows
