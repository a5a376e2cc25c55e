"""Frequency-to-time synthesis and wavefront arrival measurement.

A band of fixed-frequency kernels is combined into a travelling pulse,

    Psi(x, t) = (1/2pi) sum_w A(w) Psi_st(x; w) e^{-i w t} dw,

the discrete form of the inverse Fourier transform over a one-sided
physical band (the all-frequency integral including negatives is traded
for a one-sided spectrum; the envelope is then just |Psi|, no Hilbert
transform needed).  In a non-dispersive medium the pulse front at a
point arrives at the Fermat travel time of the connecting ray, which is
what `front_arrival` measures: the earliest threshold crossing of the
envelope.

Gaussian bands are the default: their envelope is compact with no
sidelobes, so threshold detection is robust, and the half-rise offset
sqrt(2 ln 2)/sigma_w is an explicit broadening budget for front tests.
The omega grid must be uniform; choose d_omega so the alias period
2 pi / d_omega exceeds twice the longest travel time of interest.

Synthesis is a fixed-order reduction over the band (bit-stable given the
same inputs); the per-frequency kernels that feed it are independent
computations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NoSignalError, UsageError
from .grids import UniformGrid
from .propagator import SpectralKernel

__all__ = [
    "FrequencySpectrum",
    "TimeKernel",
    "synthesize_time",
    "front_arrival",
    "dual_time_grid",
]


@dataclass(frozen=True)
class FrequencySpectrum:
    """Uniform omega samples with complex weights A(omega)."""

    omegas: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        wt = np.asarray(self.weights, dtype=complex)
        if om.ndim != 1 or om.size < 1 or om.shape != wt.shape:
            raise UsageError("spectrum needs matching 1-d omega and weight arrays")
        if om.size > 1:
            d = np.diff(om)
            if np.any(d <= 0) or np.max(np.abs(d - d[0])) > 1e-9 * d[0]:
                raise UsageError("omega grid must be uniform and increasing")
        if not np.all(np.isfinite(wt)):
            raise UsageError("weights must be finite (absolutely summable)")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "weights", wt)

    @property
    def d_omega(self):
        return float(self.omegas[1] - self.omegas[0]) if self.omegas.size > 1 else 1.0

    @property
    def band(self):
        return float(self.omegas[0]), float(self.omegas[-1])

    @classmethod
    def gaussian_band(cls, center, sigma, count, halfwidth_sigmas=3.0):
        """One-sided Gaussian band centered at `center` (must stay positive)."""
        if center <= 0 or sigma <= 0:
            raise UsageError("center and sigma must be positive")
        lo = center - halfwidth_sigmas * sigma
        hi = center + halfwidth_sigmas * sigma
        if lo <= 0:
            raise UsageError("band extends to non-positive omega; narrow it")
        om = np.linspace(lo, hi, count)
        wt = np.exp(-((om - center) ** 2) / (2.0 * sigma * sigma))
        return cls(om, wt.astype(complex))

    def half_rise_time(self):
        """Half-maximum rise offset of the synthesized Gaussian envelope.

        For weights exp(-(w-w0)^2/(2 s^2)) the envelope is
        exp(-s^2 (t-T)^2 / 2), so |Psi| crosses half its peak
        sqrt(2 ln 2)/s before the peak.  Used as the broadening budget in
        front-arrival tests.
        """
        peak = np.max(np.abs(self.weights))
        spread = np.sqrt(np.sum(np.abs(self.weights) * (self.omegas - self.center()) ** 2)
                         / np.sum(np.abs(self.weights)))
        if spread == 0:
            return 0.0
        del peak
        return math.sqrt(2.0 * math.log(2.0)) / spread

    def center(self):
        w = np.abs(self.weights)
        return float(np.sum(self.omegas * w) / np.sum(w))

    def alias_period(self):
        """Time window before synthesis wraps: 2 pi / d_omega."""
        return 2.0 * math.pi / self.d_omega


@dataclass(frozen=True)
class TimeKernel:
    """Psi(x, t) on (grid shape) x (time); linear in the spectrum weights."""

    grid: UniformGrid
    t: np.ndarray
    values: np.ndarray          # shape grid.shape + (nt,)
    x0: np.ndarray
    spectrum: FrequencySpectrum

    def trace(self, x):
        """Complex time trace at the node nearest x."""
        return self.values[self.grid.index_of(x)]


def synthesize_time(kernels: Sequence[SpectralKernel], spectrum: FrequencySpectrum,
                    t) -> TimeKernel:
    """Discrete Fourier synthesis of the band onto a time grid."""
    t = np.asarray(t, dtype=float)
    if len(kernels) != spectrum.omegas.size:
        raise UsageError("need one kernel per spectrum sample")
    grid = kernels[0].grid
    for k, om in zip(kernels, spectrum.omegas):
        if k.grid != grid:
            raise UsageError("kernels must share one spatial grid")
        if abs(k.omega - om) > 1e-9 * max(abs(om), 1.0):
            raise UsageError(f"kernel omega {k.omega} does not match spectrum {om}")
    stack = np.stack([k.values for k in kernels])          # (nw, *shape)
    phases = np.exp(-1j * np.outer(spectrum.omegas, t))    # (nw, nt)
    coeff = spectrum.weights * spectrum.d_omega / (2.0 * math.pi)
    flat = stack.reshape(stack.shape[0], -1)
    vals = (coeff[:, None] * flat).T @ phases              # (npts, nt)
    vals = vals.reshape(grid.shape + (t.size,))
    return TimeKernel(grid=grid, t=t, values=vals, x0=kernels[0].x0, spectrum=spectrum)


def front_arrival(kern: TimeKernel, x, threshold: float = 0.5) -> float:
    """Earliest time |Psi(x, .)| exceeds threshold * max |Psi(x, .)|.

    The crossing is located by linear interpolation between the
    bracketing samples, so the result is not quantized to the grid.
    """
    if not 0 < threshold <= 1:
        raise UsageError("threshold must be in (0, 1]")
    env = np.abs(kern.trace(x))
    peak = float(np.max(env))
    if peak <= 1e-300 or not np.isfinite(peak):
        raise NoSignalError("time trace has no signal above numerical floor")
    level = threshold * peak
    above = env >= level
    i = int(np.argmax(above))
    if i == 0:
        return float(kern.t[0])
    t0, t1 = kern.t[i - 1], kern.t[i]
    e0, e1 = env[i - 1], env[i]
    frac = (level - e0) / (e1 - e0) if e1 > e0 else 1.0
    return float(t0 + frac * (t1 - t0))


def peak_arrival(kern: TimeKernel, x) -> float:
    """Envelope-peak time at x (parabolic refinement of the maximum)."""
    env = np.abs(kern.trace(x))
    i = int(np.argmax(env))
    if env[i] <= 1e-300:
        raise NoSignalError("time trace has no signal above numerical floor")
    if 0 < i < env.size - 1:
        y0, y1, y2 = env[i - 1], env[i], env[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom != 0:
            dt = kern.t[1] - kern.t[0]
            return float(kern.t[i] + 0.5 * dt * (y0 - y2) / denom)
    return float(kern.t[i])


def dual_time_grid(spectrum: FrequencySpectrum, t0: float = 0.0) -> np.ndarray:
    """Time grid DFT-dual to the omega grid (exact discrete Parseval)."""
    n = spectrum.omegas.size
    dt = 2.0 * math.pi / (n * spectrum.d_omega)
    return t0 + dt * np.arange(n)
