"""CSV and JSON export of continuation branches."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .branch import Branch

__all__ = ["CSV_COLUMNS", "branch_rows", "branch_to_csv", "branch_to_json", "write_branch"]

CSV_COLUMNS = ("control", "nu1", "x2_0", "x2_max", "x2_min", "residual", "tag")


def _fmt(x) -> str:
    return format(float(x), ".17g")


def branch_rows(branch: Branch):
    """One row per branch point, then one per special point (tagged)."""
    rows = []
    for pt in branch.points:
        m = pt.measures
        rows.append((pt.lam, pt.nu1, m["x2_0"], m["x2_max"], m["x2_min"], pt.residual, ""))
    for sp in branch.specials:
        if sp.point is not None:
            m = sp.point.measures
            rows.append((sp.lam, sp.point.nu1, m["x2_0"], m["x2_max"], m["x2_min"], sp.point.residual, sp.kind))
        else:
            nan = math.nan
            rows.append((sp.lam, nan, nan, nan, nan, nan, sp.kind))
    return rows


def branch_to_csv(branch: Branch, extra_rows=()) -> str:
    """CSV text; ``extra_rows`` are appended in the same column layout."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in list(branch_rows(branch)) + list(extra_rows):
        w.writerow([_fmt(v) for v in r[:-1]] + [r[-1]])
    return buf.getvalue()


def _point_dict(pt, meshes: bool):
    d = {
        "params": pt.params.as_dict(),
        "control": pt.control,
        "lam": pt.lam,
        "residual": pt.residual,
        "measures": pt.measures,
        "fold_test": pt.fold_test,
        "pf_sign": pt.pf_sign,
    }
    if meshes:
        d["grid"] = pt.mesh.grid.tolist()
        d["X"] = pt.mesh.X.tolist()
    return d


def branch_to_json(branch: Branch, meshes: bool = False, extra: dict | None = None) -> str:
    doc = {
        "control": branch.control,
        "stop_reason": branch.stop_reason,
        "points": [_point_dict(pt, meshes) for pt in branch.points],
        "specials": [
            {
                "kind": sp.kind,
                "index": sp.index,
                "lam": sp.lam,
                "point": None if sp.point is None else _point_dict(sp.point, meshes),
                "data": {k: v for k, v in sp.data.items() if not isinstance(v, np.ndarray)},
            }
            for sp in branch.specials
        ],
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, default=_json_default, allow_nan=True)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def write_branch(
    branch: Branch, path, fmt: str = "csv", meshes: bool = False, extra: dict | None = None, extra_rows=()
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path.write_text(branch_to_csv(branch, extra_rows))
    elif fmt == "json":
        path.write_text(branch_to_json(branch, meshes, extra))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path
