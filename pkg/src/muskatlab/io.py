"""Reading and writing run artifacts: snapshots, diagnostics tables, JSON summaries."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .diagnostics import COLUMNS, NUMERIC_COLUMNS
from .errors import DataError
from .grid import Grid, InterfaceField

__all__ = [
    "write_snapshot",
    "read_snapshot",
    "write_diagnostics",
    "read_diagnostics",
    "write_json",
    "read_json",
    "snapshot_name",
    "numeric_mismatches",
]

SNAPSHOT_DIR = "snapshots"


def snapshot_name(index: int) -> str:
    return f"{SNAPSHOT_DIR}/snap_{index:06d}.csv"


def write_snapshot(path, t: float, field: InterfaceField) -> None:
    """Long-format CSV (coordinates then f) behind a one-line metadata comment.

    Values are written with 17 significant digits so a reread field is
    bit-identical to the one written.
    """
    g = field.grid
    cols = [c.ravel() for c in g.coords] + [field.values.ravel()]
    names = ["x1", "x2"][: g.dim] + ["f"]
    meta = f"# t={t!r} dim={g.dim} n={g.n} length={g.length!r}"
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.column_stack(cols), fmt="%.17g", delimiter=",",
               header=meta + "\n" + ",".join(names), comments="")


def read_snapshot(path) -> tuple[float, InterfaceField]:
    path = Path(path)
    try:
        with path.open() as fh:
            meta = fh.readline()
            fh.readline()
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataError(f"{path}: unreadable snapshot ({exc})") from exc
    try:
        items = dict(kv.split("=", 1) for kv in meta.lstrip("#").split())
        t = float(items["t"])
        grid = Grid(int(items["dim"]), int(items["n"]), float(items["length"]))
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: bad metadata line {meta.strip()!r}") from exc
    if data.shape != (grid.n**grid.dim, grid.dim + 1):
        raise DataError(f"{path}: expected {grid.n**grid.dim} rows of {grid.dim + 1} columns, "
                        f"got {data.shape}")
    try:
        field = InterfaceField(grid, data[:, -1].reshape(grid.shape))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc
    return t, field


def write_diagnostics(path, rows: list[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([r[c] if c == "flags" else f"{r[c]:.17g}" for c in COLUMNS])


def read_diagnostics(path) -> list[dict]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != COLUMNS:
                raise DataError(f"{path}: unexpected header {reader.fieldnames}")
            rows = []
            for i, r in enumerate(reader, 2):
                try:
                    rows.append({c: (r[c] if c == "flags" else float(r[c])) for c in COLUMNS})
                except (TypeError, ValueError) as exc:
                    raise DataError(f"{path}: line {i}: {exc}") from exc
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from exc
    return rows


def _clean(obj):
    # JSON has no NaN or Inf
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating, np.integer)):
        return _clean(obj.item())
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(obj), indent=2) + "\n")


def read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: line {exc.lineno}: {exc.msg}") from exc


def numeric_mismatches(stored: list[dict], fresh: list[dict], rtol: float = 1e-9) -> list[str]:
    """Describe every numeric cell of ``stored`` that differs from ``fresh`` beyond ``rtol``."""
    out = []
    if len(stored) != len(fresh):
        out.append(f"row count {len(stored)} != recomputed {len(fresh)}")
    # roundoff-level entries (a conserved mean, say) are judged against the column's scale
    scale = {c: max((abs(float(r[c])) for r in fresh if math.isfinite(float(r[c]))), default=0.0)
             for c in NUMERIC_COLUMNS}
    for c in ("mean", "max", "min"):
        scale[c] = max(scale[c], scale["linf"])
    for i, (a, b) in enumerate(zip(stored, fresh)):
        for c in NUMERIC_COLUMNS:
            x, y = float(a[c]), float(b[c])
            if math.isnan(x) and math.isnan(y):
                continue
            if not math.isclose(x, y, rel_tol=rtol, abs_tol=rtol * scale[c] + 1e-300):
                out.append(f"row {i} column {c}: stored {x!r}, recomputed {y!r}")
    return out
