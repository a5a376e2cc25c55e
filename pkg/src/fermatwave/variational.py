"""Discrete Fermat functional on polylines and its minimization.

The travel time of a polyline with vertices v_0..v_{M-1} is

    T = (1/c) sum_k n(m_k) |v_{k+1} - v_k|,     m_k = midpoint of segment k.

Midpoint evaluation keeps the gradient of the discrete functional exact
and cheap.  `minimize_path` runs Polak-Ribiere conjugate gradient with a
backtracking (Armijo) line search over the interior vertices; endpoints
never move.  The result is an independent check on the shooting solver:
both target the stationary path homotopic to the straight chord.

All functions are pure; independent minimizations can run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, UsageError
from .medium import IndexField, eval_grad, eval_index

__all__ = [
    "PathPolyline",
    "path_time",
    "path_time_gradient",
    "minimize_path",
    "resample_polyline",
    "polyline_sup_distance",
]


@dataclass(frozen=True)
class PathPolyline:
    """Ordered vertices with fixed endpoints."""

    vertices: np.ndarray   # (M, d)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2:
            raise UsageError("polyline needs at least two vertices of shape (M, d)")
        seg = np.linalg.norm(np.diff(v, axis=0), axis=1)
        degenerate = np.allclose(v, v[0])
        if not degenerate and np.any(seg == 0):
            raise UsageError("consecutive polyline vertices must be distinct")
        object.__setattr__(self, "vertices", v)

    @property
    def m(self):
        return self.vertices.shape[0]

    @classmethod
    def chord(cls, x_i, x_f, m):
        """Uniformly sampled straight segment between the endpoints."""
        x_i = np.asarray(x_i, dtype=float)
        x_f = np.asarray(x_f, dtype=float)
        t = np.linspace(0.0, 1.0, m)[:, None]
        return cls((1 - t) * x_i + t * x_f)


def path_time(field: IndexField, p: PathPolyline, c: float = 1.0) -> float:
    """Segment-midpoint quadrature of integral n ds / c along the polyline."""
    v = p.vertices
    seg = np.diff(v, axis=0)
    lengths = np.linalg.norm(seg, axis=1)
    live = lengths > 0
    if not np.any(live):
        # degenerate zero-length path
        eval_index(field, v[0])   # still validates the domain
        return 0.0
    mids = 0.5 * (v[:-1] + v[1:])
    n_mid = eval_index(field, mids[live])
    return float(np.sum(n_mid * lengths[live]) / c)


def path_time_gradient(field: IndexField, p: PathPolyline, c: float = 1.0) -> np.ndarray:
    """Exact gradient of the discrete functional w.r.t. interior vertices.

    Returns an array of shape (M-2, d); endpoint rows are omitted since
    they are fixed.
    """
    v = p.vertices
    m = v.shape[0]
    if m < 3:
        return np.zeros((0, v.shape[1]))
    seg = np.diff(v, axis=0)
    lengths = np.linalg.norm(seg, axis=1)
    if np.any(lengths == 0):
        raise UsageError("zero-length segment in gradient evaluation")
    units = seg / lengths[:, None]
    mids = 0.5 * (v[:-1] + v[1:])
    n_mid = eval_index(field, mids)
    gn_mid = eval_grad(field, mids)
    g = np.zeros((m - 2, v.shape[1]))
    for j in range(1, m - 1):
        km, k = j - 1, j
        g[j - 1] = (0.5 * gn_mid[km] * lengths[km] + n_mid[km] * units[km]
                    + 0.5 * gn_mid[k] * lengths[k] - n_mid[k] * units[k])
    return g / c


def minimize_path(field: IndexField, x_i, x_f, m: int,
                  init: PathPolyline = None, c: float = 1.0,
                  gtol: float = None, max_iter: int = 20000,
                  history: list = None) -> PathPolyline:
    """Local minimizer of path_time over interior vertices (PR+ CG).

    Convergence: infinity-norm of the interior gradient below
    gtol = 1e-10 * n_max / c unless overridden.  Initialization defaults
    to the uniformly sampled chord so the minimizer targets the same
    stationary path as the shooting solver.  Raises ConvergenceError
    carrying the last iterate if the tolerance is not reached.
    """
    x_i = np.asarray(x_i, dtype=float)
    x_f = np.asarray(x_f, dtype=float)
    if np.array_equal(x_i, x_f):
        return PathPolyline(np.array([x_i, x_f]))  # zero-length path, time 0
    if m < 3:
        raise UsageError("minimize_path needs at least 3 vertices")
    if gtol is None:
        gtol = 1e-10 * field.max_index() / c
    p = init if init is not None else PathPolyline.chord(x_i, x_f, m)
    if p.m != m:
        p = resample_polyline(p, m)
    v = p.vertices.copy()

    def f_of(interior):
        w = v.copy()
        w[1:-1] = interior
        try:
            return path_time(field, PathPolyline(w), c)
        except (DomainError, UsageError):
            return np.inf

    def g_of(interior):
        w = v.copy()
        w[1:-1] = interior
        return path_time_gradient(field, PathPolyline(w), c)

    xcur = v[1:-1].copy()
    fcur = f_of(xcur)
    if history is not None:
        history.append(fcur)
    g = g_of(xcur)
    direction = -g
    gg = float(np.sum(g * g))
    alpha = 1.0 / max(np.sqrt(gg), 1e-300)
    for it in range(max_iter):
        if np.max(np.abs(g)) < gtol:
            v[1:-1] = xcur
            return PathPolyline(v)
        slope = float(np.sum(g * direction))
        if slope >= 0:   # restart on a non-descent direction
            direction = -g
            slope = -gg
        # Armijo backtracking; accepted iterates never increase the time
        a = alpha
        for _ in range(60):
            fnew = f_of(xcur + a * direction)
            if fnew <= fcur + 1e-4 * a * slope:
                break
            a *= 0.5
        else:
            v[1:-1] = xcur
            raise ConvergenceError("line search failed",
                                   best=PathPolyline(v),
                                   residual=float(np.max(np.abs(g))), iterations=it)
        xnew = xcur + a * direction
        if history is not None:
            history.append(fnew)
        gnew = g_of(xnew)
        ggnew = float(np.sum(gnew * gnew))
        beta = max(0.0, float(np.sum(gnew * (gnew - g))) / gg)   # PR+
        dnew = -gnew + beta * direction
        # scale-invariant first trial step for the next line search
        slope_new = float(np.sum(gnew * dnew))
        alpha = a * slope / slope_new if slope_new < 0 else 1.0 / max(np.sqrt(ggnew), 1e-300)
        alpha = min(alpha, 1e6 * a + 1e-300)
        xcur, fcur, g, gg, direction = xnew, fnew, gnew, ggnew, dnew
    v[1:-1] = xcur
    raise ConvergenceError(f"CG did not reach gtol={gtol:.2e} in {max_iter} iterations",
                           best=PathPolyline(v), residual=float(np.max(np.abs(g))),
                           iterations=max_iter)


def resample_polyline(p: PathPolyline, m: int) -> PathPolyline:
    """Resample at m points equally spaced in cumulative chord length."""
    v = p.vertices
    seg = np.linalg.norm(np.diff(v, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0:
        return PathPolyline(np.repeat(v[:1], 2, axis=0))
    snew = np.linspace(0.0, s[-1], m)
    out = np.empty((m, v.shape[1]))
    for i in range(v.shape[1]):
        out[:, i] = np.interp(snew, s, v[:, i])
    out[0], out[-1] = v[0], v[-1]
    return PathPolyline(out)


def polyline_sup_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric sup distance between two sampled curves.

    Max over points of one curve of the distance to the nearest segment
    of the other, symmetrized.
    """
    def one_sided(pts, poly):
        p0 = poly[:-1]
        seg = np.diff(poly, axis=0)
        ss = np.sum(seg * seg, axis=1)
        worst = 0.0
        for q in pts:
            t = np.clip(np.einsum("ij,ij->i", q - p0, seg) / np.where(ss > 0, ss, 1.0), 0, 1)
            proj = p0 + t[:, None] * seg
            dmin = np.min(np.linalg.norm(proj - q, axis=1))
            worst = max(worst, dmin)
        return worst

    return max(one_sided(a, b), one_sided(b, a))
