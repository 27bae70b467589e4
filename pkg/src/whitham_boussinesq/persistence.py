"""CSV/JSON formats for profiles, sweeps and comparison reports.

All numbers are written with 17 significant digits so doubles round-trip.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .spectral import Grid


def fmt(x) -> str:
    return f"{float(x):.17g}"


def write_field_csv(path, grid: Grid, values) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("x", "value"))
        for x, v in zip(grid.nodes, values):
            w.writerow((fmt(x), fmt(v)))


def read_field_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(row for row in fh if not row.lstrip().startswith("#"))
        header = tuple(h.strip() for h in next(reader))
        if header != ("x", "value"):
            raise ValueError(f"{path}: expected header x,value, got {','.join(header)}")
        data = np.array([[float(a), float(b)] for a, b in reader], dtype=float)
    if data.size == 0:
        raise ValueError(f"{path}: no samples")
    return data[:, 0], data[:, 1]


def profile_paths(prefix) -> tuple[Path, Path, Path]:
    prefix = Path(prefix)
    if prefix.suffix == ".json":
        prefix = prefix.with_suffix("")
    return (
        prefix.parent / f"{prefix.name}_eta.csv",
        prefix.parent / f"{prefix.name}_vel.csv",
        prefix.with_suffix(".json"),
    )


def write_profile_bundle(prefix, grid: Grid, eta, vel, meta: dict) -> None:
    """Write ``<prefix>_eta.csv``, ``<prefix>_vel.csv`` and the ``<prefix>.json`` sidecar."""
    eta_path, vel_path, meta_path = profile_paths(prefix)
    write_field_csv(eta_path, grid, eta)
    write_field_csv(vel_path, grid, vel)
    sidecar = {"n": grid.n, "L": grid.length, **meta}
    meta_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def read_profile_bundle(prefix) -> tuple[np.ndarray, np.ndarray, np.ndarray, dict]:
    eta_path, vel_path, meta_path = profile_paths(prefix)
    x, eta = read_field_csv(eta_path)
    x2, vel = read_field_csv(vel_path)
    if len(x) != len(x2) or not np.array_equal(x, x2):
        raise ValueError(f"{eta_path} and {vel_path} are sampled on different abscissae")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return x, eta, vel, meta


def soliton_meta(result) -> dict:
    return {
        "c": result.c,
        "residual": result.residual,
        "iterations": result.iterations,
        "amplitude": result.amplitude,
        "converged": result.converged,
    }


SWEEP_HEADER = ("c", "amplitude", "residual", "iterations")


def write_sweep_csv(results, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in results:
            w.writerow((fmt(r.c), fmt(r.amplitude), fmt(r.residual), str(r.iterations)))


def read_sweep_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SWEEP_HEADER:
            raise ValueError(f"{path}: unexpected sweep header {reader.fieldnames}")
        return [
            {
                "c": float(row["c"]),
                "amplitude": float(row["amplitude"]),
                "residual": float(row["residual"]),
                "iterations": int(row["iterations"]),
            }
            for row in reader
        ]


def write_report_json(report, path) -> None:
    Path(path).write_text(json.dumps(report.to_json(), indent=2) + "\n")
