"""Artifact writers: CSV and legacy-VTK fields, JSON-lines logs, JSON documents."""
from __future__ import annotations

import csv
import json
import math
import threading
from pathlib import Path

import numpy as np

from .fields import GridFunction

LOG_KEYS = ("stage", "iter", "energy", "residual", "step")


def jsonable(obj):
    """Convert numpy scalars/arrays and non-finite floats (to null) for strict JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n", encoding="utf-8")
    return path


def write_csv(path, u: GridFunction) -> Path:
    """Columns node_id, x, [y], u with round-trip float formatting."""
    path = Path(path)
    mesh = u.mesh
    header = ["node_id", "x", "y"][: 2 + (mesh.dim == 2)] + ["u"]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(mesh.n_nodes):
            w.writerow([i, *(repr(float(c)) for c in mesh.nodes[i]), repr(float(u.values[i]))])
    return path


def read_csv(path, mesh) -> GridFunction:
    """Inverse of ``write_csv``; node ids must cover the mesh exactly."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "node_id" not in rows[0] or "u" not in rows[0]:
        raise ValueError(f"{path}: expected columns node_id, ..., u")
    vals = np.full(mesh.n_nodes, np.nan)
    for row in rows:
        vals[int(row["node_id"])] = float(row["u"])
    if np.isnan(vals).any() or len(rows) != mesh.n_nodes:
        raise ValueError(f"{path}: has {len(rows)} rows, mesh has {mesh.n_nodes} nodes")
    return GridFunction(mesh, vals)


def write_vtk(path, u: GridFunction, name: str = "u") -> Path:
    """Legacy ASCII VTK STRUCTURED_GRID (a line of points in 1D)."""
    path = Path(path)
    mesh = u.mesh
    dims = list(mesh.resolution) + [0] * (3 - mesh.dim)
    dims = [d + 1 for d in dims]
    pts = np.zeros((mesh.n_nodes, 3))
    pts[:, : mesh.dim] = mesh.nodes
    lines = [
        "# vtk DataFile Version 3.0",
        f"{name}",
        "ASCII",
        "DATASET STRUCTURED_GRID",
        f"DIMENSIONS {dims[0]} {dims[1]} {dims[2]}",
        f"POINTS {mesh.n_nodes} double",
        *(f"{x!r} {y!r} {z!r}" for x, y, z in pts.tolist()),
        f"POINT_DATA {mesh.n_nodes}",
        f"SCALARS {name} double 1",
        "LOOKUP_TABLE default",
        *(repr(float(v)) for v in u.values),
    ]
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def write_field(directory, name: str, u: GridFunction, formats) -> list:
    directory = Path(directory)
    out = []
    if "csv" in formats:
        out.append(write_csv(directory / f"{name}.csv", u))
    if "vtk" in formats:
        out.append(write_vtk(directory / f"{name}.vtk", u, name))
    return out


class JsonlLog:
    """Callback that appends one JSON record per iteration; safe to share across threads."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._fh = self.path.open("w", encoding="utf-8")

    def __call__(self, record: dict):
        rec = {k: record.get(k) for k in LOG_KEYS}
        line = json.dumps(jsonable(rec), allow_nan=False)
        with self._lock:
            self._fh.write(line + "\n")

    def close(self):
        with self._lock:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
