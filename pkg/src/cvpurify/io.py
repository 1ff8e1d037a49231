"""Flat-file formats: result tables and Wigner grids.

Numbers are written with the shortest decimal string that round-trips to the
same double, so identical results give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import math

import numpy as np

from .results import RunResult
from .wigner import Grid2D, GridGeometry

RESULTS_SCHEMA = "cvpurify.runresult/1"
WIGNER_SCHEMA = "cvpurify.wigner/1"
RESULT_COLUMNS = RunResult.columns() + ["error"]
_GEOMETRY_KEYS = ("x_min", "x_max", "p_min", "p_max", "nx", "np")


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def results_to_csv(rows) -> str:
    """Serialize result rows (RunResult or dicts keyed by column) to CSV text."""
    buf = io.StringIO()
    buf.write(f"# schema={RESULTS_SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for row in rows:
        d = row.as_dict() if isinstance(row, RunResult) else row
        writer.writerow([format_value(d.get(c)) for c in RESULT_COLUMNS])
    return buf.getvalue()


def write_results_csv(rows, path) -> None:
    with open(path, "w", newline="") as f:
        f.write(results_to_csv(rows))


def _parse_cell(text):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_results_csv(path) -> list[dict]:
    with open(path, newline="") as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    return [{k: _parse_cell(v) for k, v in row.items()} for row in reader]


def wigner_to_csv(grid: Grid2D) -> str:
    """Header lines with the geometry, then one CSV line per x value (values over p)."""
    g = grid.geometry
    buf = io.StringIO()
    buf.write(f"# schema={WIGNER_SCHEMA}\n")
    buf.write("# " + ",".join(f"{k}={format_value(getattr(g, k))}" for k in _GEOMETRY_KEYS) + "\n")
    for row in grid.values:
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def write_wigner_csv(grid: Grid2D, path) -> None:
    with open(path, "w", newline="") as f:
        f.write(wigner_to_csv(grid))


def read_wigner_csv(path) -> Grid2D:
    with open(path) as f:
        lines = f.read().splitlines()
    if lines[0] != f"# schema={WIGNER_SCHEMA}":
        raise ValueError(f"{path}: not a {WIGNER_SCHEMA} file")
    meta = dict(item.split("=") for item in lines[1][2:].split(","))
    geom = GridGeometry(
        *(float(meta[k]) for k in _GEOMETRY_KEYS[:4]), int(meta["nx"]), int(meta["np"])
    )
    values = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    return Grid2D(geom, values)


def is_nan(v) -> bool:
    return isinstance(v, float) and math.isnan(v)
