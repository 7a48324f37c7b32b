"""Shared on-disk formats: field snapshots, time-series CSV, PGM renders.

Snapshot layout ("MNCS1"): one ASCII header line
    MNCS1 <components> <n> <L> <t>\n
followed by little-endian IEEE-754 float64 samples, row-major within a
component, components in order. The payload is bit-exact for identical
doubles; header floats use shortest round-trip decimal form.

Time-series CSV: header "t,var_u,var_v,mean_u,mean_v,l2_u,l2_v,linf_u,linf_v"
(the _v columns are dropped for single-component runs) plus optional
"m2,m4,m8,..." mean-power columns, one row per recorded step, every number
printed with 17 significant digits.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsRecord
from .spectral import GridSpec, RealField

__all__ = [
    "SnapshotError",
    "save_snapshot",
    "load_snapshot",
    "write_series_csv",
    "read_series_csv",
    "export_pgm",
    "compare_snapshots",
    "compare_csv",
]

_MAGIC = "MNCS1"
_COMPONENT_SUFFIXES = ("u", "v", "w", "x", "y", "z")


class SnapshotError(ValueError):
    """Malformed snapshot file."""


def save_snapshot(path: str | Path, field: RealField, t: float = 0.0) -> None:
    grid = field.grid
    header = f"{_MAGIC} {grid.components} {grid.n} {grid.length!r} {float(t)!r}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(field.data, dtype="<f8").tobytes())


def load_snapshot(path: str | Path) -> tuple[RealField, float]:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").strip()
        parts = header.split()
        if len(parts) != 5 or parts[0] != _MAGIC:
            raise SnapshotError(f"{path}: bad header '{header}'")
        try:
            components, n = int(parts[1]), int(parts[2])
            length, t = float(parts[3]), float(parts[4])
        except ValueError as exc:
            raise SnapshotError(f"{path}: bad header '{header}'") from exc
        grid = GridSpec(n, length, components=components)
        expected = components * n * n
        raw = fh.read(8 * expected + 1)
    if len(raw) != 8 * expected:
        raise SnapshotError(
            f"{path}: expected {8 * expected} payload bytes, got {len(raw)}"
        )
    data = np.frombuffer(raw, dtype="<f8").reshape(grid.field_shape())
    field = RealField(grid, data.copy())
    field.check_finite()
    return field, t


def _series_columns(components: int, lp_jmax: int) -> list[str]:
    if components > len(_COMPONENT_SUFFIXES):
        raise ValueError(f"too many components for CSV naming: {components}")
    tags = _COMPONENT_SUFFIXES[:components]
    cols = ["t"]
    for stat in ("var", "mean", "l2", "linf"):
        cols += [f"{stat}_{tag}" for tag in tags]
    cols += [f"m{2 ** j}" for j in range(1, lp_jmax + 1)]
    return cols


def write_series_csv(
    path: str | Path, records: list[DiagnosticsRecord], components: int, lp_jmax: int = 0
) -> None:
    lines = [",".join(_series_columns(components, lp_jmax))]
    for rec in records:
        row = [rec.t, *rec.variance, *rec.mean, *rec.l2, *rec.linf]
        if lp_jmax >= 1:
            if rec.lp_ladder is None or len(rec.lp_ladder) < lp_jmax:
                raise ValueError("record lacks the requested mean-power ladder")
            row += list(rec.lp_ladder[:lp_jmax])
        lines.append(",".join(f"{x:.17g}" for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_series_csv(path: str | Path) -> dict[str, np.ndarray]:
    lines = Path(path).read_text(encoding="ascii").strip().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    names = lines[0].split(",")
    rows = [[float(x) for x in line.split(",")] for line in lines[1:]]
    if any(len(r) != len(names) for r in rows):
        raise ValueError(f"{path}: ragged CSV rows")
    table = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    return {name: table[:, i] for i, name in enumerate(names)}


def export_pgm(
    field: RealField,
    component: int,
    path: str | Path,
    vmin: float | None = None,
    vmax: float | None = None,
) -> None:
    """16-bit binary PGM of one component, linearly mapped onto [0, 65535].

    The range defaults to the component's own min/max; pass vmin/vmax to
    share a scale across snapshots. A constant field uses the degenerate
    range [v, v+1].
    """
    if not 0 <= component < field.grid.components:
        raise ValueError(f"component {component} out of range")
    data = field.data[component]
    lo = float(data.min()) if vmin is None else float(vmin)
    hi = float(data.max()) if vmax is None else float(vmax)
    if hi <= lo:
        hi = lo + 1.0
    scaled = np.clip((data - lo) / (hi - lo), 0.0, 1.0)
    pixels = np.round(scaled * 65535).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{field.grid.n} {field.grid.n}\n65535\n".encode("ascii"))
        fh.write(pixels.tobytes())


def compare_snapshots(path_a: str | Path, path_b: str | Path, tol: float):
    """Max-abs comparison of two snapshots; (ok, max_diff, message)."""
    a, ta = load_snapshot(path_a)
    b, tb = load_snapshot(path_b)
    if a.grid != b.grid:
        return False, float("inf"), f"grid mismatch: {a.grid} vs {b.grid}"
    diff = float(np.abs(a.data - b.data).max())
    ok = diff <= tol
    note = f"max abs diff {diff:.3e} (tol {tol:.3e}, t={ta!r}/{tb!r})"
    return ok, diff, note


def compare_csv(path_a: str | Path, path_b: str | Path, tol: float):
    """Column-wise relative comparison of two series files."""
    a = read_series_csv(path_a)
    b = read_series_csv(path_b)
    if list(a) != list(b):
        return False, float("inf"), f"column mismatch: {list(a)} vs {list(b)}"
    worst = 0.0
    worst_col = ""
    for name in a:
        if a[name].shape != b[name].shape:
            return False, float("inf"), f"row-count mismatch in column {name}"
        denom = np.maximum(np.maximum(np.abs(a[name]), np.abs(b[name])), 1e-300)
        rel = np.abs(a[name] - b[name]) / denom
        rel[a[name] == b[name]] = 0.0
        col_worst = float(rel.max()) if rel.size else 0.0
        if col_worst > worst:
            worst, worst_col = col_worst, name
    ok = worst <= tol
    note = f"max relative diff {worst:.3e} in column '{worst_col}' (tol {tol:.3e})"
    return ok, worst, note
