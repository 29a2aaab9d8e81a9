"""Reading and writing surface grids, profiles and tables as CSV.

Two surface layouts are understood:

* long form: header ``x_mm,y_mm,z_mm`` and one point per row;
* grid form: a ``# grid nx=.. ny=.. x0=.. y0=.. dx=.. dy=..`` header line
  followed by ``ny`` rows of ``nx`` heights. Optional ``cx=``, ``cy=`` and
  ``rim=`` keys give the surface center and rim radius in mm.

Missing heights are written and read as ``nan``. Every writer goes through a
temporary file and an atomic rename, so a failed write leaves nothing behind.
"""

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .fitting import SurfaceGrid

__all__ = [
    "SurfaceFormatError",
    "atomic_write_text",
    "fmt",
    "format_report",
    "grid_csv_text",
    "read_surface_csv",
    "table_csv_text",
]

LONG_HEADER = ("x_mm", "y_mm", "z_mm")
_REQUIRED_KEYS = ("nx", "ny", "x0", "y0", "dx", "dy")
_OPTIONAL_KEYS = ("cx", "cy", "rim")


class SurfaceFormatError(ValueError):
    """Malformed surface CSV."""


def fmt(value):
    """Format a number with 12 significant digits (``nan`` stays ``nan``)."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.12g}"


def atomic_write_text(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_float(token, where):
    token = token.strip()
    try:
        value = float(token)
    except ValueError:
        raise SurfaceFormatError(f"{where}: not a number: {token!r}") from None
    if math.isinf(value):
        raise SurfaceFormatError(f"{where}: infinite value")
    return value


def _parse_grid_header(line):
    fields = {}
    for token in line.lstrip("#").split()[1:]:
        key, sep, value = token.partition("=")
        if not sep:
            raise SurfaceFormatError(f"grid header: expected key=value, got {token!r}")
        if key not in _REQUIRED_KEYS + _OPTIONAL_KEYS:
            raise SurfaceFormatError(f"grid header: unknown key {key!r}")
        fields[key] = value
    missing = [k for k in _REQUIRED_KEYS if k not in fields]
    if missing:
        raise SurfaceFormatError(f"grid header: missing {', '.join(missing)}")
    try:
        nx, ny = int(fields["nx"]), int(fields["ny"])
    except ValueError:
        raise SurfaceFormatError("grid header: nx and ny must be integers") from None
    if nx < 1 or ny < 1:
        raise SurfaceFormatError("grid header: nx and ny must be positive")
    meta = {k: _parse_float(fields[k], "grid header") for k in fields if k not in ("nx", "ny")}
    if meta["dx"] <= 0 or meta["dy"] <= 0:
        raise SurfaceFormatError("grid header: dx and dy must be positive")
    return nx, ny, meta


def _read_grid(lines, header):
    nx, ny, meta = _parse_grid_header(header)
    rows = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if len(rows) != ny:
        raise SurfaceFormatError(f"grid: expected {ny} rows, found {len(rows)}")
    z = np.empty((ny, nx))
    for j, row in enumerate(rows):
        cells = row.split(",")
        if len(cells) != nx:
            raise SurfaceFormatError(f"grid row {j + 1}: expected {nx} values, found {len(cells)}")
        z[j] = [_parse_float(c, f"grid row {j + 1}") for c in cells]
    x = meta["x0"] + meta["dx"] * np.arange(nx)
    y = meta["y0"] + meta["dy"] * np.arange(ny)
    center = None
    if "cx" in meta or "cy" in meta:
        if not ("cx" in meta and "cy" in meta):
            raise SurfaceFormatError("grid header: cx and cy must be given together")
        center = (meta["cx"], meta["cy"])
    return x, y, z, center, meta.get("rim")


def _read_long(lines, header):
    names = tuple(h.strip() for h in header.split(","))
    if names != LONG_HEADER:
        raise SurfaceFormatError(f"expected header {','.join(LONG_HEADER)}, got {header.strip()!r}")
    pts = []
    for lineno, row in enumerate(lines, start=2):
        if not row.strip():
            continue
        cells = row.split(",")
        if len(cells) != 3:
            raise SurfaceFormatError(f"line {lineno}: expected 3 values, found {len(cells)}")
        xv, yv, zv = (_parse_float(c, f"line {lineno}") for c in cells)
        if math.isnan(xv) or math.isnan(yv):
            raise SurfaceFormatError(f"line {lineno}: coordinates must not be nan")
        pts.append((xv, yv, zv))
    if not pts:
        raise SurfaceFormatError("no data rows")
    pts = np.array(pts)
    xs, ix = np.unique(pts[:, 0], return_inverse=True)
    ys, iy = np.unique(pts[:, 1], return_inverse=True)
    if xs.size * ys.size > 4 * len(pts):
        raise SurfaceFormatError("points do not lie on a rectilinear grid")
    z = np.full((ys.size, xs.size), np.nan)
    seen = np.zeros(z.shape, dtype=bool)
    for i, j, zv in zip(ix, iy, pts[:, 2]):
        if seen[j, i]:
            raise SurfaceFormatError(f"duplicate point at ({xs[i]}, {ys[j]})")
        seen[j, i] = True
        z[j, i] = zv
    return xs, ys, z, None, None


def read_surface_csv(path, center=None, rim_radius=None):
    """Load a surface CSV in either layout as a :class:`SurfaceGrid`.

    ``center`` and ``rim_radius`` override whatever the file provides.

    Raises
    ------
    SurfaceFormatError
        On any structural problem with the file.
    ValueError
        If the data violate :class:`SurfaceGrid` invariants (e.g. all nan).
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    while lines and not lines[0].strip():
        lines.pop(0)
    if not lines:
        raise SurfaceFormatError("empty file")
    header, body = lines[0], lines[1:]
    if header.lstrip().startswith("#"):
        if header.lstrip("#").split()[:1] != ["grid"]:
            raise SurfaceFormatError(f"unrecognised header {header.strip()!r}")
        x, y, z, file_center, file_rim = _read_grid(body, header)
    else:
        x, y, z, file_center, file_rim = _read_long(body, header)
    return SurfaceGrid(
        x,
        y,
        z,
        center=center if center is not None else file_center,
        rim_radius=rim_radius if rim_radius is not None else file_rim,
    )


def _spacing(coords, name):
    if coords.size < 2:
        return 1.0
    steps = np.diff(coords)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0) or steps[0] <= 0:
        raise ValueError(f"{name} is not uniformly increasing; cannot write grid form")
    return float(steps[0])


def grid_csv_text(values, x_coords, y_coords, center=None, rim_radius=None):
    """Grid-form CSV text for a ``(ny, nx)`` array on the given coordinates."""
    values = np.asarray(values, dtype=float)
    x_coords = np.asarray(x_coords, dtype=float)
    y_coords = np.asarray(y_coords, dtype=float)
    head = [
        "# grid",
        f"nx={x_coords.size}",
        f"ny={y_coords.size}",
        f"x0={fmt(x_coords[0])}",
        f"y0={fmt(y_coords[0])}",
        f"dx={fmt(_spacing(x_coords, 'x_coords'))}",
        f"dy={fmt(_spacing(y_coords, 'y_coords'))}",
    ]
    if center is not None:
        head += [f"cx={fmt(center[0])}", f"cy={fmt(center[1])}"]
    if rim_radius is not None:
        head.append(f"rim={fmt(rim_radius)}")
    out = [" ".join(head)]
    out += [",".join(fmt(v) for v in row) for row in values]
    return "\n".join(out) + "\n"


def table_csv_text(header, rows):
    lines = [",".join(header)]
    lines += [",".join("" if v is None else fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def format_report(report):
    """Flat JSON object for a :class:`~fracbessel.fitting.FitReport`."""
    flat = {}
    for key, value in report.summary().items():
        if isinstance(value, bool):
            flat[key] = value
        elif isinstance(value, int):
            flat[key] = value
        else:
            flat[key] = float(fmt(value))
    return json.dumps(flat, indent=2)
