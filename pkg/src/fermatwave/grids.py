"""Uniform Cartesian grids shared by the wave-side solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError


@dataclass(frozen=True)
class UniformGrid:
    """Axis-aligned uniform grid: node i -> lo + h * i, same h on all axes."""

    lo: np.ndarray
    shape: tuple
    h: float

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        shape = tuple(int(n) for n in np.atleast_1d(self.shape))
        if lo.size != len(shape):
            raise UsageError("grid lo and shape must have matching dimension")
        if self.h <= 0 or any(n < 2 for n in shape):
            raise UsageError("grid needs positive spacing and >= 2 nodes per axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def centered(cls, extent, n, dim):
        """Cube of side `extent` centered at the origin, n nodes per axis."""
        h = extent / n
        lo = np.full(dim, -extent / 2.0)
        return cls(lo=lo, shape=(n,) * dim, h=h)

    @property
    def dim(self):
        return len(self.shape)

    @property
    def hi(self):
        return self.lo + self.h * (np.array(self.shape) - 1)

    def axes(self):
        return [self.lo[i] + self.h * np.arange(self.shape[i]) for i in range(self.dim)]

    def mesh(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def points(self):
        """All nodes as an (n_total, d) array, C-order."""
        return np.stack([m.ravel() for m in self.mesh()], axis=1)

    def index_of(self, x):
        """Multi-index of the node nearest to x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.rint((x - self.lo) / self.h).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.array(self.shape)):
            raise UsageError(f"point {x} outside grid")
        return tuple(int(i) for i in idx)

    def node(self, idx):
        return self.lo + self.h * np.asarray(idx, dtype=float)

    def wavenumbers_squared(self):
        """|k|^2 on the DFT dual grid, broadcast to `shape`."""
        ks = [2.0 * np.pi * np.fft.fftfreq(n, d=self.h) for n in self.shape]
        k2 = np.zeros(self.shape)
        for i, k in enumerate(ks):
            sh = [1] * self.dim
            sh[i] = -1
            k2 = k2 + (k ** 2).reshape(sh)
        return k2

    def radius_from(self, x0):
        """Distance of every node from x0, shaped like the grid."""
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        r2 = np.zeros(self.shape)
        for i, ax in enumerate(self.axes()):
            sh = [1] * self.dim
            sh[i] = -1
            r2 = r2 + ((ax - x0[i]) ** 2).reshape(sh)
        return np.sqrt(r2)

    def border_distance(self):
        """Distance of every node from the nearest grid face (chebyshev-style)."""
        out = np.full(self.shape, np.inf)
        hi = self.hi
        for i, ax in enumerate(self.axes()):
            sh = [1] * self.dim
            sh[i] = -1
            d = np.minimum(ax - self.lo[i], hi[i] - ax).reshape(sh)
            out = np.minimum(out, d)
        return out
