"""Independent frequency-domain checks: Green functions, stencil residuals,
and a direct sparse Helmholtz solve.

Everything here verifies that a fixed-frequency field G satisfies

    (lap + n(x)^2 omega^2 / c^2) G = source,

with outgoing behavior at the border.  The solver discretizes the
operator with the standard second-order (2d+1)-point stencil and absorbs
outgoing waves in a quadratic sponge, n -> n (1 + i sigma(x)); the
resulting matrix is complex symmetric, so reciprocity G(a;b) = G(b;a)
holds to solver roundoff.  The residual evaluator applies the same
stencil to any field on the grid and reports the interior defect plus
the discrete source-ball sum, which must come out near 1 for a unit
source.

Matrix assembly is row-parallel in principle; the factorization is a
sequential direct solve (desk scale: 1-d and 2-d, small 3-d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError, UsageError
from .grids import UniformGrid
from .medium import IndexField, eval_index
from .propagator import SpectralKernel, _gaussian_source

__all__ = [
    "SpongeSpec",
    "HelmholtzProblem",
    "ResidualReport",
    "analytic_green",
    "fd_residual",
    "solve_helmholtz",
]


@dataclass(frozen=True)
class SpongeSpec:
    """Absorbing sponge: n -> n (1 + i sigma), sigma a clipped quadratic ramp."""

    width: float
    strength: float = 2.0

    @classmethod
    def for_frequency(cls, omega, c=1.0, wavelengths=2.5):
        lam = 2.0 * math.pi * c / omega
        return cls(width=wavelengths * lam)

    def profile(self, grid: UniformGrid):
        ramp = np.clip((self.width - grid.border_distance()) / self.width, 0.0, 1.0)
        return self.strength * ramp ** 2


@dataclass(frozen=True)
class HelmholtzProblem:
    """Medium, frequency, grid, source and absorber for one solve."""

    field: Optional[IndexField]
    omega: float
    grid: UniformGrid
    x0: np.ndarray
    sponge: Optional[SpongeSpec] = None
    c: float = 1.0
    source_width: float = 0.0
    min_points_per_wavelength: float = 12.0

    def __post_init__(self):
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=float)))
        n_max = 1.0 if self.field is None else self.field.max_index(self.omega)
        lam_min = 2.0 * math.pi * self.c / (n_max * self.omega)
        ppw = lam_min / self.grid.h
        if ppw < self.min_points_per_wavelength:
            raise UsageError(f"grid resolves only {ppw:.1f} points per local "
                             f"wavelength; need >= {self.min_points_per_wavelength}")

    def index_grid(self):
        if self.field is None:
            return np.ones(self.grid.shape)
        om = self.omega if self.field.dispersion is not None else None
        return eval_index(self.field, self.grid.points(), om).reshape(self.grid.shape)


def analytic_green(x, x0, k, d):
    """Outgoing free-space Green function of (lap + k^2).

    d = 1: e^{i k |x-x0|} / (2 i k);  d = 3: -e^{i k r} / (4 pi r).
    The 2-d (Hankel) form is deliberately not provided; 2-d checks rely
    on the two independent numerical routes instead.
    """
    if d == 2:
        raise UsageError("2-d analytic Green function not provided")
    if d not in (1, 3):
        raise UsageError("dimension must be 1 or 3")
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if d == 1:
        r = np.abs(np.squeeze(x - x0))
    else:
        r = np.linalg.norm(x - x0, axis=-1)
    r = np.asarray(r, dtype=float)
    if np.any(r == 0):
        raise UsageError("Green function is singular at x = x0")
    if d == 1:
        return np.exp(1j * k * r) / (2j * k)
    return -np.exp(1j * k * r) / (4.0 * math.pi * r)


@dataclass(frozen=True)
class ResidualReport:
    """Interior stencil defect of a candidate field plus the delta check."""

    max_residual: float
    l2_residual: float
    delta_check: float
    cells_checked: int

    def as_dict(self):
        return {"max": self.max_residual, "l2": self.l2_residual,
                "delta_check": self.delta_check, "cells": self.cells_checked}


def _stencil_apply(values, h):
    d = values.ndim
    out = -2.0 * d * values.copy()
    for ax in range(d):
        out += np.roll(values, 1, axis=ax) + np.roll(values, -1, axis=ax)
    return out / (h * h)


def fd_residual(problem: HelmholtzProblem, kernel: SpectralKernel,
                source_exclude: float = None, ball_radius: float = None,
                homogeneous: bool = False) -> ResidualReport:
    """Apply the second-order stencil plus n^2 omega^2/c^2 to a field.

    Reports the max and L2 residual over interior cells (grid border,
    absorber margin and a ball around the source excluded) and the
    discrete-delta check: h^d times the residual summed over the source
    ball, which approximates the source integral (1 for a unit source,
    0 when `homogeneous` marks a source-free field).
    """
    if kernel.grid != problem.grid:
        raise UsageError("kernel grid does not match problem grid")
    grid = problem.grid
    n2 = problem.index_grid() ** 2
    res = _stencil_apply(kernel.values, grid.h) \
        + n2 * (problem.omega / problem.c) ** 2 * kernel.values
    border = grid.border_distance()
    margin = problem.sponge.width if problem.sponge is not None else 0.0
    interior = border > margin + 2 * grid.h
    r = grid.radius_from(problem.x0)
    if source_exclude is None:
        source_exclude = max(4 * grid.h, 6.0 * problem.source_width)
    if ball_radius is None:
        ball_radius = max(3 * grid.h, 5.0 * problem.source_width)
    mask = interior & (r > source_exclude) if not homogeneous else interior
    if not np.any(mask):
        raise UsageError("no interior cells left after exclusions")
    vals = np.abs(res[mask])
    ball = r <= ball_radius
    delta = float(np.real(np.sum(res[ball]) * grid.h ** grid.dim))
    return ResidualReport(max_residual=float(np.max(vals)),
                          l2_residual=float(np.sqrt(np.mean(vals ** 2))),
                          delta_check=delta,
                          cells_checked=int(np.sum(mask)))


def solve_helmholtz(problem: HelmholtzProblem) -> SpectralKernel:
    """Direct sparse solve of the stencil system with a sponge absorber.

    The source is a unit discrete delta (or a unit Gaussian when the
    problem declares source_width > 0).  Returns the field as a
    SpectralKernel on the problem grid.
    """
    grid = problem.grid
    d = grid.dim
    ntot = int(np.prod(grid.shape))
    if d == 3 and ntot > 64 ** 3:
        raise UsageError("3-d direct solves supported only up to ~64^3")
    n = problem.index_grid()
    if problem.sponge is not None:
        n_c = n * (1.0 + 1j * problem.sponge.profile(grid))
    else:
        n_c = n.astype(complex)
    h2 = grid.h ** 2
    diag = -2.0 * d / h2 + (n_c.ravel() ** 2) * (problem.omega / problem.c) ** 2
    idx = np.arange(ntot).reshape(grid.shape)
    rows = [np.arange(ntot)]
    cols = [np.arange(ntot)]
    vals = [diag]
    for ax in range(d):
        for off in (1, -1):
            sl_i = [slice(None)] * d
            sl_j = [slice(None)] * d
            sl_i[ax] = slice(max(0, off), grid.shape[ax] + min(0, off))
            sl_j[ax] = slice(max(0, -off), grid.shape[ax] + min(0, -off))
            ii = idx[tuple(sl_i)].ravel()
            jj = idx[tuple(sl_j)].ravel()
            rows.append(ii)
            cols.append(jj)
            vals.append(np.full(ii.size, 1.0 / h2, dtype=complex))
    mat = sp.csc_matrix((np.concatenate(vals),
                         (np.concatenate(rows), np.concatenate(cols))),
                        shape=(ntot, ntot))
    rhs = _gaussian_source(grid, problem.x0, problem.source_width).ravel()
    try:
        lu = spla.splu(mat)
        sol = lu.solve(rhs)
    except (RuntimeError, ValueError) as exc:
        raise SolverError(f"sparse factorization failed: {exc}") from exc
    if not np.all(np.isfinite(sol)):
        raise SolverError("solution contains non-finite values; system is "
                          "singular or near-singular at this frequency")
    values = sol.reshape(grid.shape)
    return SpectralKernel(grid=grid, values=values, x0=problem.x0,
                          omega=problem.omega, eps=0.0, s_max=np.inf, c=problem.c,
                          source_index=grid.index_of(problem.x0),
                          source_width=problem.source_width)
