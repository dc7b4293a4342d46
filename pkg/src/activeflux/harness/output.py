"""CSV, PGM and run-log writers.

The state CSV has one degree of freedom per line, tagged with its kind and
its index among the owned dofs of that kind; a ``meta`` row carries the time
and step count.  Floats are written with ``repr``, which
round-trips exactly, so reloading gives a bit-identical state.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from activeflux.scheme import KINDS, GridState, fill_ghosts
from activeflux.state import cons_to_prim

CSV_HEADER = ("kind", "i", "j", "q0", "q1", "q2", "q3")


def write_state_csv(state: GridState, path, periodic: bool = True) -> Path:
    """Averages (conserved) and point values (primitive) of the owned dofs."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        w.writerow(["meta", state.steps, 0, repr(float(state.time)), 0, 0, 0])
        for kind in ("avg",) + KINDS:
            arr = state.interior_view(kind, periodic)
            nx, ny = arr.shape[1:]
            for i in range(nx):
                for j in range(ny):
                    w.writerow([kind, i, j] + [repr(float(v)) for v in arr[:, i, j]])
    return path


def read_state_csv(path, template: GridState, periodic: bool = True) -> GridState:
    """Load a CSV written by :func:`write_state_csv` into a copy of ``template``."""
    state = template.copy()
    with Path(path).open(newline="") as fh:
        rows = csv.reader(fh)
        if tuple(next(rows)) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV header")
        views = {kind: state.interior_view(kind, periodic) for kind in ("avg",) + KINDS}
        for row in rows:
            if row[0] == "meta":
                state.steps = int(row[1])
                state.time = float(row[3])
                continue
            views[row[0]][:, int(row[1]), int(row[2])] = [float(v) for v in row[3:7]]
    for kind in ("avg",) + KINDS:
        fill_ghosts(getattr(state, kind), state.grid, kind, periodic)
    return state


def write_pgm(field, path, vmin=None, vmax=None) -> Path:
    """Binary 8-bit greyscale image of ``field[i, j]``; ``i`` runs left to right, ``j`` bottom to top."""
    field = np.asarray(field, dtype=float)
    lo = np.nanmin(field) if vmin is None else vmin
    hi = np.nanmax(field) if vmax is None else vmax
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    img = np.clip(np.nan_to_num((field - lo) * scale), 0, 255).astype(np.uint8)
    img = img.T[::-1]
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    """Inverse of :func:`write_pgm` up to quantization, as ``field[i, j]``."""
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    width, height, depth = int(parts[1]), int(parts[2]), int(parts[3])
    if depth != 255:
        raise ValueError("only 8-bit PGM is supported")
    img = np.frombuffer(parts[4][: width * height], dtype=np.uint8).reshape(height, width)
    return img[::-1].T


def average_primitives(state: GridState, gamma: float):
    return cons_to_prim(state.interior_view("avg"), gamma)


def write_heatmaps(state: GridState, outdir, gamma: float, prefix: str = "") -> list:
    """Density and velocity-magnitude heatmaps of the cell averages."""
    prim = average_primitives(state, gamma)
    outdir = Path(outdir)
    return [
        write_pgm(prim[0], outdir / f"{prefix}density.pgm"),
        write_pgm(np.hypot(prim[1], prim[2]), outdir / f"{prefix}speed.pgm"),
    ]


def radial_profile(state: GridState, gamma: float, center=(0.0, 0.0)):
    """``(r, rho, |v|, p)`` of every cell average, sorted by radius."""
    g = state.grid
    x, y = g.coordinates("avg")
    sx, sy = g.interior("avg")
    r = np.hypot(x[sx, sy] - center[0], y[sx, sy] - center[1]).ravel()
    prim = average_primitives(state, gamma).reshape(4, -1)
    order = np.argsort(r, kind="stable")
    return np.stack([r, prim[0], np.hypot(prim[1], prim[2]), prim[3]])[:, order]


def write_radial_csv(state: GridState, path, gamma: float, center=(0.0, 0.0)) -> Path:
    data = radial_profile(state, gamma, center)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("r", "rho", "speed", "p"))
        for col in data.T:
            w.writerow([repr(float(v)) for v in col])
    return path


class RunLog:
    """Newline-delimited JSON records, one per step plus free-form events."""

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._fh = self.path.open("w") if self.path is not None else None
        self.records: list[dict] = []

    def write(self, record: dict) -> None:
        self.records.append(record)
        if self._fh is not None:
            self._fh.write(json.dumps(record, sort_keys=True) + "\n")

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
