"""File formats: flat binary grids, kernel fields, and CSV exports.

Binary layout is a single ASCII header line terminated by a newline,
followed by raw little-endian values in C (row-major) order:

    FWGRID v1 dims=n1[,n2[,n3]] spacing=h origin=x[,y[,z]]
    ... float64 node values ...

    FWKERN v1 dims=... spacing=... origin=... x0=... omega=... eps=...
    ... complex128 field values ...

    FWTIME v1 dims=... spacing=... origin=... x0=... t0=... dt=... nt=...
    ... complex128 values, space-major with time as the last axis ...

CSV writers use a fixed float format so byte-identical reruns are
possible for identical inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import UsageError
from .grids import UniformGrid

_FMT = "%.17g"


def _header_dict(line):
    parts = line.strip().split()
    if len(parts) < 2:
        raise UsageError(f"malformed header: {line!r}")
    tag, version = parts[0], parts[1]
    kv = {}
    for item in parts[2:]:
        key, _, val = item.partition("=")
        kv[key] = val
    return tag, version, kv


def _floats(s):
    return np.array([float(v) for v in s.split(",")], dtype=float)


def _ints(s):
    return tuple(int(v) for v in s.split(","))


def _fmt_vec(v):
    return ",".join(_FMT % float(x) for x in np.atleast_1d(v))


def write_index_grid(path, values, spacing, origin):
    values = np.asarray(values, dtype=float)
    origin = np.atleast_1d(np.asarray(origin, dtype=float))
    header = (f"FWGRID v1 dims={','.join(str(n) for n in values.shape)} "
              f"spacing={_FMT % spacing} origin={_fmt_vec(origin)}\n")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def read_index_grid(path):
    """Returns (values, spacing, origin)."""
    with open(path, "rb") as fh:
        line = fh.readline().decode("ascii")
        tag, version, kv = _header_dict(line)
        if tag != "FWGRID":
            raise UsageError(f"not an index-grid file: {tag}")
        dims = _ints(kv["dims"])
        spacing = float(kv["spacing"])
        origin = _floats(kv["origin"])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != int(np.prod(dims)):
        raise UsageError("index-grid payload size does not match dims")
    return data.reshape(dims).copy(), spacing, origin


def write_kernel(path, kernel):
    """Serialize a SpectralKernel (or any grid field with metadata)."""
    grid = kernel.grid
    header = (f"FWKERN v1 dims={','.join(str(n) for n in grid.shape)} "
              f"spacing={_FMT % grid.h} origin={_fmt_vec(grid.lo)} "
              f"x0={_fmt_vec(kernel.x0)} omega={_FMT % kernel.omega} "
              f"eps={_FMT % kernel.eps}\n")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(kernel.values, dtype="<c16").tobytes())


def read_kernel(path):
    """Returns (grid, values, meta dict with x0/omega/eps)."""
    with open(path, "rb") as fh:
        line = fh.readline().decode("ascii")
        tag, version, kv = _header_dict(line)
        if tag != "FWKERN":
            raise UsageError(f"not a kernel file: {tag}")
        dims = _ints(kv["dims"])
        grid = UniformGrid(lo=_floats(kv["origin"]), shape=dims,
                           h=float(kv["spacing"]))
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != int(np.prod(dims)):
        raise UsageError("kernel payload size does not match dims")
    meta = {"x0": _floats(kv["x0"]), "omega": float(kv["omega"]),
            "eps": float(kv["eps"])}
    return grid, data.reshape(dims).copy(), meta


def write_time_kernel(path, tk):
    grid = tk.grid
    t = tk.t
    dt = t[1] - t[0] if t.size > 1 else 0.0
    header = (f"FWTIME v1 dims={','.join(str(n) for n in grid.shape)} "
              f"spacing={_FMT % grid.h} origin={_fmt_vec(grid.lo)} "
              f"x0={_fmt_vec(tk.x0)} t0={_FMT % t[0]} dt={_FMT % dt} nt={t.size}\n")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(tk.values, dtype="<c16").tobytes())


def read_time_kernel(path):
    """Returns (grid, t, values, meta)."""
    with open(path, "rb") as fh:
        line = fh.readline().decode("ascii")
        tag, version, kv = _header_dict(line)
        if tag != "FWTIME":
            raise UsageError(f"not a time-kernel file: {tag}")
        dims = _ints(kv["dims"])
        nt = int(kv["nt"])
        grid = UniformGrid(lo=_floats(kv["origin"]), shape=dims,
                           h=float(kv["spacing"]))
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != int(np.prod(dims)) * nt:
        raise UsageError("time-kernel payload size does not match header")
    t = float(kv["t0"]) + float(kv["dt"]) * np.arange(nt)
    meta = {"x0": _floats(kv["x0"])}
    return grid, t, data.reshape(dims + (nt,)).copy(), meta


_AXES = "xyz"


def write_ray_csv(path, sol):
    """Columns: s, x..., t..., T_opt; one row per sample."""
    d = sol.x.shape[1]
    cols = ["s"] + [_AXES[i] for i in range(d)] + [f"t{_AXES[i]}" for i in range(d)] + ["T_opt"]
    data = np.column_stack([sol.s, sol.x, sol.t_hat, sol.t_opt])
    _write_csv(path, cols, data)


def write_polyline_csv(path, poly):
    d = poly.vertices.shape[1]
    _write_csv(path, [_AXES[i] for i in range(d)], poly.vertices)


def read_polyline_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data


def write_trace_csv(path, t, trace):
    """Columns: t, re, im, abs for one probe point."""
    data = np.column_stack([t, trace.real, trace.imag, np.abs(trace)])
    _write_csv(path, ["t", "re", "im", "abs"], data)


def write_table_csv(path, columns, rows):
    _write_csv(path, columns, np.asarray(rows, dtype=float))


def _write_csv(path, columns, data):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in np.atleast_2d(data):
            fh.write(",".join(_FMT % v for v in row) + "\n")
