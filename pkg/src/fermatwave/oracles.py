"""Independent reference computations used by the verification suite.

These deliberately take different numerical routes from the production
code they check: the split-step propagator here applies the potential in
two half phases around a full spectral kinetic step (Strang ordering),
whereas the sliced-kernel engine applies the full potential phase at mid
proper-time between two kinetic half steps.  Keeping the oracle separate
keeps every cross-check a genuine two-route comparison.
"""

from __future__ import annotations

import numpy as np

from .grids import UniformGrid
from .medium import IndexField, eval_potential


def split_step_kernel(field, grid: UniformGrid, x0, omega, s, m, c=1.0):
    """Strang split-step kernel from a grid delta: half-V, kinetic, half-V."""
    if field is None:
        V = np.zeros(grid.shape)
    else:
        V = eval_potential(field, grid.points(), omega, c).reshape(grid.shape)
    ebar = s / m
    k2 = grid.wavenumbers_squared()
    kin = np.exp(-1j * ebar * k2)
    vph2 = np.exp(-1j * (ebar / 2.0) * V)
    psi = np.zeros(grid.shape, dtype=complex)
    psi[grid.index_of(np.atleast_1d(x0))] = grid.h ** (-grid.dim)
    for _ in range(m):
        psi = vph2 * np.fft.ifftn(kin * np.fft.fftn(vph2 * psi))
    return psi


def fit_order(scales, errors):
    """Least-squares convergence order: slope of log(err) vs log(scale).

    `scales` is the thing being refined (h, ds, 1/M, ...); the fitted
    order is positive when errors shrink as scales shrink.
    """
    scales = np.asarray(scales, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        raise ValueError("errors must be positive for a log-log fit")
    slope = np.polyfit(np.log(scales), np.log(errors), 1)[0]
    return float(slope)


def central_gradient(func, x, h):
    """Second-order central difference gradient of a scalar callable."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (func(x + e) - func(x - e)) / (2.0 * h)
    return g


def masked_rel_l2(a, b, mask=None):
    """Relative L2 difference of two fields over an optional mask."""
    a = np.asarray(a)
    b = np.asarray(b)
    if mask is not None:
        a = a[mask]
        b = b[mask]
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))
