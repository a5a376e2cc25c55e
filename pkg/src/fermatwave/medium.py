"""Refractive-index fields n(x) and the derived proper-time potential.

A field is the single source of truth for the medium: index values,
analytic gradients, and the potential V(x) = (1 - n^2) * omega^2 / c^2
that drives the proper-time propagator.  Four kinds are supported:

* ``homogeneous``      n = n0 everywhere
* ``linear``           n = n0 + g * x[axis]           (stratified)
* ``parabolic``        n^2 = n0^2 * (1 - alpha^2 * |x_perp|^2)   (GRIN)
* ``grid``             multilinear interpolation of sampled node values

Units: internally c = 1 is assumed wherever a speed of light enters a
formula; every public entry point that needs c takes it explicitly so
SI-unit runs remain possible.  All evaluations are pure functions of
immutable field data and are safe for concurrent readers.

Evaluation outside the declared axis-aligned bounding box is a hard
DomainError -- silent extrapolation corrupts ray traces.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator, RegularGridInterpolator

from .errors import DomainError, UsageError

__all__ = [
    "IndexField",
    "DispersionTable",
    "Potential",
    "eval_index",
    "eval_grad",
    "eval_potential",
]


@dataclass(frozen=True)
class DispersionTable:
    """Tabulated dimensionless index modifier D(omega).

    The dispersive index is separable: n(x, omega) = n(x) * D(omega) / D(omega_ref).
    Interpolation is monotone cubic (PCHIP) so tabulated data cannot
    overshoot between nodes.
    """

    omegas: np.ndarray
    values: np.ndarray
    omega_ref: float

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        val = np.asarray(self.values, dtype=float)
        if om.ndim != 1 or om.size < 2 or om.size != val.size:
            raise UsageError("dispersion table needs matching 1-d omega/value arrays")
        if np.any(np.diff(om) <= 0):
            raise UsageError("dispersion omegas must be strictly increasing")
        if np.any(val <= 0):
            raise UsageError("dispersion values must be positive")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "_interp", PchipInterpolator(om, val, extrapolate=False))

    def factor(self, omega):
        """D(omega) / D(omega_ref); raises outside the tabulated band."""
        num = self._interp(omega)
        if np.any(np.isnan(num)):
            raise DomainError(f"omega={omega} outside dispersion table "
                              f"[{self.omegas[0]}, {self.omegas[-1]}]")
        den = float(self._interp(self.omega_ref))
        return num / den


@dataclass(frozen=True)
class IndexField:
    """Immutable refractive-index field over an axis-aligned box.

    Build instances through the classmethod constructors rather than
    directly; they validate positivity and domain consistency.
    """

    kind: str
    dimension: int
    lo: np.ndarray
    hi: np.ndarray
    n0: float = 1.0
    g: float = 0.0          # linear slope, 1/length
    alpha: float = 0.0      # GRIN strength, 1/length
    axis: int = 0           # gradient axis (linear) / optical axis (parabolic)
    grid: Optional[np.ndarray] = None
    spacing: float = 0.0
    origin: Optional[np.ndarray] = None
    dispersion: Optional[DispersionTable] = None
    grid_gradient: str = "linear"   # "linear" (exact for the interpolant) or "cubic"
    _cubic: object = dc_field(default=None, repr=False, compare=False)

    # ---------------------------------------------------------------- builders

    @classmethod
    def homogeneous(cls, n0, lo, hi, dispersion=None):
        lo, hi, d = _box(lo, hi)
        if n0 <= 0:
            raise UsageError("n0 must be positive")
        return cls(kind="homogeneous", dimension=d, lo=lo, hi=hi, n0=float(n0),
                   dispersion=dispersion)

    @classmethod
    def linear_stratified(cls, n0, g, axis, lo, hi, dispersion=None):
        """n = n0 + g * x[axis]; n must stay positive over the box."""
        lo, hi, d = _box(lo, hi)
        if not 0 <= axis < d:
            raise UsageError(f"axis {axis} out of range for dimension {d}")
        for end in (lo[axis], hi[axis]):
            if n0 + g * end <= 0:
                raise UsageError("linear profile reaches n <= 0 inside the box")
        return cls(kind="linear", dimension=d, lo=lo, hi=hi, n0=float(n0),
                   g=float(g), axis=int(axis), dispersion=dispersion)

    @classmethod
    def parabolic_grin(cls, n0, alpha, axis, lo, hi, dispersion=None):
        """n^2 = n0^2 (1 - alpha^2 |x_perp|^2), x_perp transverse to `axis`."""
        lo, hi, d = _box(lo, hi)
        if not 0 <= axis < d:
            raise UsageError(f"axis {axis} out of range for dimension {d}")
        rho2 = sum(max(abs(lo[i]), abs(hi[i])) ** 2 for i in range(d) if i != axis)
        if alpha * alpha * rho2 >= 1.0:
            raise UsageError("parabolic profile reaches n <= 0 inside the box; "
                             "shrink the box or alpha")
        return cls(kind="parabolic", dimension=d, lo=lo, hi=hi, n0=float(n0),
                   alpha=float(alpha), axis=int(axis), dispersion=dispersion)

    @classmethod
    def from_grid(cls, values, spacing, origin, dispersion=None, grid_gradient="linear"):
        """Sampled node values on a uniform grid; multilinear interpolation."""
        values = np.asarray(values, dtype=float)
        d = values.ndim
        if d not in (1, 2, 3):
            raise UsageError("grid fields support 1, 2 or 3 dimensions")
        if np.any(values <= 0):
            raise UsageError("grid node values must all be positive")
        if spacing <= 0:
            raise UsageError("grid spacing must be positive")
        origin = np.asarray(origin, dtype=float).reshape(d)
        lo = origin.copy()
        hi = origin + spacing * (np.array(values.shape) - 1)
        fld = cls(kind="grid", dimension=d, lo=lo, hi=hi, grid=values,
                  spacing=float(spacing), origin=origin, dispersion=dispersion,
                  grid_gradient=grid_gradient)
        if grid_gradient == "cubic":
            axes = [origin[i] + spacing * np.arange(values.shape[i]) for i in range(d)]
            object.__setattr__(fld, "_cubic",
                               RegularGridInterpolator(axes, values, method="cubic"))
        elif grid_gradient != "linear":
            raise UsageError("grid_gradient must be 'linear' or 'cubic'")
        return fld

    # ---------------------------------------------------------------- queries

    def contains(self, x, margin=0.0):
        x = np.asarray(x, dtype=float)
        lo, hi = self.lo, self.hi
        for i in range(x.shape[-1]):
            if x[..., i].min() < lo[i] + margin or x[..., i].max() > hi[i] - margin:
                return False
        return True

    def max_index(self, omega=None):
        """Largest n over the box (exact for analytic kinds, node max for grids)."""
        if self.kind == "homogeneous" or self.kind == "parabolic":
            base = self.n0
        elif self.kind == "linear":
            base = max(self.n0 + self.g * self.lo[self.axis],
                       self.n0 + self.g * self.hi[self.axis])
        else:
            base = float(np.max(self.grid))
        if self.dispersion is not None and omega is not None:
            base *= float(self.dispersion.factor(omega))
        return base

    # convenience method forms of the module-level operations
    def index(self, x, omega=None):
        return eval_index(self, x, omega)

    def grad(self, x):
        return eval_grad(self, x)

    def potential(self, x, omega, c=1.0):
        return eval_potential(self, x, omega, c)


def _box(lo, hi):
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or lo.ndim != 1:
        raise UsageError("lo/hi must be 1-d arrays of equal length")
    d = lo.size
    if d not in (1, 2, 3):
        raise UsageError("dimension must be 1, 2 or 3")
    if np.any(hi <= lo):
        raise UsageError("domain box must have positive extent")
    return lo, hi, d


# -------------------------------------------------------------------- eval ops

def eval_index(field: IndexField, x, omega=None):
    """Refractive index n(x), or n(x, omega) for dispersive fields.

    `x` is a point of shape (d,) or a batch of shape (m, d).  Dispersive
    fields require omega; non-dispersive fields ignore it only if None.
    """
    x, single = _points(field, x)
    _check_inside(field, x)
    n = _index_raw(field, x)
    if field.dispersion is not None:
        if omega is None:
            raise UsageError("field is dispersive: omega is required")
        n = n * field.dispersion.factor(omega)
    return float(n[0]) if single else n


def eval_grad(field: IndexField, x):
    """Gradient of n at x (1/length); analytic for analytic kinds.

    Grid fields differentiate the multilinear interpolant, which is
    piecewise constant per cell along each axis; evaluation requires one
    stencil-width margin from the box edge.
    """
    x, single = _points(field, x)
    margin = 0.5 * field.spacing if field.kind == "grid" else 0.0
    _check_inside(field, x, margin=margin)
    g = _grad_raw(field, x)
    return g[0] if single else g


def eval_potential(field: IndexField, x, omega, c=1.0):
    """Proper-time potential V(x) = (1 - n(x)^2) * omega^2 / c^2."""
    n = eval_index(field, x, omega if field.dispersion is not None else None)
    return (1.0 - np.square(n)) * (omega / c) ** 2


def index_and_grad(field: IndexField, x):
    """(n, grad n) in one call; the ray integrator's hot path."""
    if field.dispersion is not None:
        raise UsageError("ray tracing treats the medium at a fixed frequency; "
                         "bake the dispersion factor into the field first")
    x = np.asarray(x, dtype=float).reshape(1, -1)
    margin = 0.5 * field.spacing if field.kind == "grid" else 0.0
    _check_inside(field, x, margin=margin)
    if field.kind == "grid" and field._cubic is None and field.dimension <= 3:
        return _grid_point_fused(field, x[0])
    n = _index_raw(field, x)
    return float(n[0]), _grad_raw(field, x)[0]


def _grid_point_fused(field, p):
    """Scalar multilinear value + gradient at one point (d <= 3)."""
    g = field.grid
    h = field.spacing
    d = field.dimension
    idx = []
    frac = []
    for i in range(d):
        u = (p[i] - field.origin[i]) / h
        k = int(u)
        k = min(max(k, 0), g.shape[i] - 2)
        idx.append(k)
        frac.append(u - k)
    if d == 1:
        k = idx[0]
        fx = frac[0]
        a, b = g[k], g[k + 1]
        return (1 - fx) * a + fx * b, np.array([(b - a) / h])
    if d == 2:
        i, j = idx
        fx, fy = frac
        v00 = g[i, j]; v01 = g[i, j + 1]; v10 = g[i + 1, j]; v11 = g[i + 1, j + 1]
        n = ((1 - fx) * ((1 - fy) * v00 + fy * v01)
             + fx * ((1 - fy) * v10 + fy * v11))
        dx = ((1 - fy) * (v10 - v00) + fy * (v11 - v01)) / h
        dy = ((1 - fx) * (v01 - v00) + fx * (v11 - v10)) / h
        return n, np.array([dx, dy])
    i, j, k = idx
    fx, fy, fz = frac
    c = np.empty((2, 2, 2))
    c[:] = g[i:i + 2, j:j + 2, k:k + 2]
    n = 0.0
    dx = dy = dz = 0.0
    for bi in (0, 1):
        wx = fx if bi else 1 - fx
        dwx = 1.0 if bi else -1.0
        for bj in (0, 1):
            wy = fy if bj else 1 - fy
            dwy = 1.0 if bj else -1.0
            for bk in (0, 1):
                wz = fz if bk else 1 - fz
                dwz = 1.0 if bk else -1.0
                v = c[bi, bj, bk]
                n += wx * wy * wz * v
                dx += dwx * wy * wz * v
                dy += wx * dwy * wz * v
                dz += wx * wy * dwz * v
    return n, np.array([dx, dy, dz]) / h


@dataclass(frozen=True)
class Potential:
    """V(x) bound to a field, frequency and light speed; callable at points."""

    field: IndexField
    omega: float
    c: float = 1.0

    def __call__(self, x):
        return eval_potential(self.field, x, self.omega, self.c)


# -------------------------------------------------------------------- internals

def _points(field, x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 and field.dimension == 1:
        x = x.reshape(1, 1)
        return x, True
    if x.ndim == 1:
        if x.size != field.dimension:
            raise UsageError(f"point has dimension {x.size}, field is {field.dimension}-d")
        return x.reshape(1, -1), True
    if x.ndim == 2 and x.shape[1] == field.dimension:
        return x, False
    raise UsageError(f"points must have shape (d,) or (m, d) with d={field.dimension}")


def _check_inside(field, pts, margin=0.0):
    lo = field.lo
    hi = field.hi
    if pts.shape[0] == 1:
        p = pts[0]
        for i in range(p.shape[0]):
            v = p[i]
            if v < lo[i] + margin or v > hi[i] - margin:
                raise DomainError(f"point {p} outside domain box "
                                  f"[{lo}, {hi}] (margin {margin})")
        return
    bad = np.any(pts < lo + margin, axis=1) | np.any(pts > hi - margin, axis=1)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise DomainError(f"point {pts[j]} outside domain box "
                          f"[{lo}, {hi}] (margin {margin})")


def _index_raw(field, pts):
    if field.kind == "homogeneous":
        return np.full(pts.shape[0], field.n0)
    if field.kind == "linear":
        return field.n0 + field.g * pts[:, field.axis]
    if field.kind == "parabolic":
        rho2 = np.sum(np.square(np.delete(pts, field.axis, axis=1)), axis=1)
        arg = 1.0 - field.alpha ** 2 * rho2
        if np.any(arg <= 0):
            raise DomainError("parabolic profile evaluated where n^2 <= 0")
        return field.n0 * np.sqrt(arg)
    if field._cubic is not None:
        return np.asarray(field._cubic(pts), dtype=float)
    return _multilinear(field, pts)


def _grad_raw(field, pts):
    m, d = pts.shape
    if field.kind == "homogeneous":
        return np.zeros((m, d))
    if field.kind == "linear":
        g = np.zeros((m, d))
        g[:, field.axis] = field.g
        return g
    if field.kind == "parabolic":
        n = _index_raw(field, pts)
        g = -(field.n0 ** 2) * (field.alpha ** 2) * pts / n[:, None]
        g[:, field.axis] = 0.0
        return g
    if field._cubic is not None:
        # cubic upgrade: centered differences of the smooth interpolant
        stp = field.spacing / 64.0
        g = np.empty((m, d))
        for i in range(d):
            ei = np.zeros(d)
            ei[i] = stp
            g[:, i] = (field._cubic(pts + ei) - field._cubic(pts - ei)) / (2 * stp)
        return g
    return _multilinear_grad(field, pts)


def _cell_coords(field, pts):
    shape = np.array(field.grid.shape)
    u = (pts - field.origin) / field.spacing
    cell = np.floor(u).astype(int)
    cell = np.clip(cell, 0, shape - 2)
    frac = u - cell
    return cell, frac


def _multilinear(field, pts):
    d = field.dimension
    cell, frac = _cell_coords(field, pts)
    out = np.zeros(pts.shape[0])
    for corner in range(1 << d):
        w = np.ones(pts.shape[0])
        idx = []
        for i in range(d):
            bit = (corner >> i) & 1
            w = w * (frac[:, i] if bit else 1.0 - frac[:, i])
            idx.append(cell[:, i] + bit)
        out += w * field.grid[tuple(idx)]
    return out


def _multilinear_grad(field, pts):
    # analytic d/dx of the multilinear interpolant: drop the weight factor
    # along the differentiated axis and difference the two corner planes
    d = field.dimension
    cell, frac = _cell_coords(field, pts)
    g = np.zeros((pts.shape[0], d))
    for j in range(d):
        for corner in range(1 << (d - 1)):
            w = np.ones(pts.shape[0])
            idx_hi = [None] * d
            idx_lo = [None] * d
            others = [i for i in range(d) if i != j]
            for pos, i in enumerate(others):
                bit = (corner >> pos) & 1
                w = w * (frac[:, i] if bit else 1.0 - frac[:, i])
                idx_hi[i] = idx_lo[i] = cell[:, i] + bit
            idx_hi[j] = cell[:, j] + 1
            idx_lo[j] = cell[:, j]
            diff = field.grid[tuple(idx_hi)] - field.grid[tuple(idx_lo)]
            g[:, j] += w * diff / field.spacing
    return g
