"""Zeta-regularized determinants for power-law spectra.

For an operator with eigenvalues lambda_n = a * n^x (n = 1, 2, ...) the
naive product prod lambda_n diverges for x > 0, but the spectral zeta
function zeta(s|A) = sum lambda_n^{-s} = a^{-s} zeta(s x) continues
analytically to s = 0, and

    det A = exp(-zeta'(0|A)) = (2 pi)^{x/2} / sqrt(a).

The module does not just quote the two constants this rests on,
zeta(0) = -1/2 and zeta'(0) = -log(2 pi)/2: `zeta_constants` recomputes
zeta'(0) by Euler-Maclaurin continuation of sum n^{-s} log n and checks
it against the closed form to 1e-10.

The special case a = (pi/T)^2, x = 2 is the spectrum of -d^2/dtau^2 on
[0, T] with endpoints pinned, whose regularized determinant is 2T; it
enters gauge-fixed path integrals as the reparametrization Jacobian.

Everything here is stateless and trivially parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import UsageError

__all__ = [
    "PowerSpectrumOperator",
    "regularized_det",
    "zeta_constants",
    "fp_determinant",
    "euler_maclaurin_zeta",
    "naive_log_partial_product",
]


@dataclass(frozen=True)
class PowerSpectrumOperator:
    """Operator defined by its eigenvalues lambda_n = a * n^x, n >= 1."""

    a: float
    x: float

    def __post_init__(self):
        if self.a <= 0:
            raise UsageError("eigenvalue scale a must be positive")

    def eigenvalue(self, n):
        return self.a * np.power(n, self.x)


def regularized_det(op: PowerSpectrumOperator) -> float:
    """Zeta-regularized determinant (2 pi)^{x/2} / sqrt(a)."""
    return (2.0 * math.pi) ** (op.x / 2.0) / math.sqrt(op.a)


def fp_determinant(T: float) -> float:
    """Determinant of d^2/dtau^2 on [0, T] with pinned ends: 2T.

    Asserts consistency with the closed-form regularized determinant of
    the explicit spectrum a = (pi/T)^2, x = 2 to 1e-14 relative.
    """
    if T <= 0:
        raise UsageError("T must be positive")
    value = 2.0 * T
    via_zeta = regularized_det(PowerSpectrumOperator(a=(math.pi / T) ** 2, x=2.0))
    if abs(via_zeta - value) > 1e-14 * value:
        raise AssertionError(f"determinant mismatch: {via_zeta} vs {value}")
    return value


def _bernoulli(upto: int):
    # exact rationals via the defining recursion
    B = [Fraction(1)]
    for m in range(1, upto + 1):
        s = Fraction(0)
        for k in range(m):
            s += math.comb(m + 1, k) * B[k]
        B.append(-s / (m + 1))
    return B


def euler_maclaurin_zeta(s: float, n_split: int = 12, terms: int = 8):
    """(zeta(s), zeta'(s)) by Euler-Maclaurin continuation.

    Splits the Dirichlet series at n_split and replaces the tail with the
    Euler-Maclaurin expansion, each term differentiated analytically in s.
    Valid for s < n_split-ish away from the pole at s = 1; `terms`
    correction terms give ~1e-14 near s = 0.
    """
    if abs(s - 1.0) < 1e-9:
        raise UsageError("zeta has a pole at s = 1")
    B = _bernoulli(2 * terms)
    n = np.arange(1, n_split)
    ln_n = np.log(n)
    N = float(n_split)
    lnN = math.log(N)
    z = float(np.sum(n ** (-s))) + 0.5 * N ** (-s) + N ** (1.0 - s) / (s - 1.0)
    zp = float(np.sum(-ln_n * n ** (-s))) - 0.5 * lnN * N ** (-s) \
        - N ** (1.0 - s) * (lnN * (s - 1.0) + 1.0) / (s - 1.0) ** 2
    for k in range(1, terms + 1):
        coef = float(B[2 * k]) / math.factorial(2 * k)
        js = s + np.arange(0, 2 * k - 1)
        P = float(np.prod(js))
        dP = float(sum(np.prod(np.delete(js, i)) for i in range(js.size)))
        Npow = N ** (-s - 2 * k + 1.0)
        z += coef * P * Npow
        zp += coef * (dP - P * lnN) * Npow
    return z, zp


def zeta_constants() -> tuple:
    """(zeta(0), zeta'(0)) = (-1/2, -log(2 pi)/2), oracle-checked.

    The Euler-Maclaurin continuation must reproduce the closed form to
    1e-10 or this raises, so a regression in either path is caught.
    """
    closed = (-0.5, -math.log(2.0 * math.pi) / 2.0)
    z, zp = euler_maclaurin_zeta(0.0)
    if abs(z - closed[0]) > 1e-10 or abs(zp - closed[1]) > 1e-10:
        raise AssertionError(f"Euler-Maclaurin continuation disagrees: {(z, zp)} vs {closed}")
    return closed


def naive_log_partial_product(op: PowerSpectrumOperator, n_max: int) -> float:
    """log prod_{n<=N} a n^x = N log a + x log N!; diverges for x > 0."""
    if n_max < 1:
        raise UsageError("n_max must be >= 1")
    return n_max * math.log(op.a) + op.x * math.lgamma(n_max + 1.0)
