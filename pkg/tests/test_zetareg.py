import math

import numpy as np
import pytest

from fermatwave import (PowerSpectrumOperator, euler_maclaurin_zeta,
                        fp_determinant, naive_log_partial_product,
                        regularized_det, zeta_constants)
from fermatwave.errors import UsageError


def test_pinned_interval_spectrum_gives_twice_length():
    for T in (0.5, 1.0, 3.0, 10.0):
        op = PowerSpectrumOperator(a=(math.pi / T) ** 2, x=2.0)
        assert regularized_det(op) == pytest.approx(2.0 * T, rel=1e-14)


def test_unit_spectrum():
    assert regularized_det(PowerSpectrumOperator(a=1.0, x=0.0)) == 1.0


def test_four_pi_squared_quadratic():
    assert regularized_det(PowerSpectrumOperator(a=4 * math.pi ** 2, x=2.0)) \
        == pytest.approx(1.0, rel=1e-14)


def test_fp_determinant_values():
    assert fp_determinant(1.0) == pytest.approx(2.0, abs=0)
    assert fp_determinant(0.5) == pytest.approx(1.0, abs=0)


def test_fp_determinant_consistency_random(rng):
    for _ in range(25):
        T = float(rng.uniform(0.01, 10.0))
        op = PowerSpectrumOperator(a=(math.pi / T) ** 2, x=2.0)
        assert abs(fp_determinant(T) - regularized_det(op)) <= 1e-14 * 2 * T


def test_zeta_constants_closed_form():
    z0, zp0 = zeta_constants()
    assert z0 == -0.5
    assert zp0 == pytest.approx(-math.log(2 * math.pi) / 2, abs=1e-15)
    assert zp0 == pytest.approx(-0.9189385, abs=5e-8)


def test_euler_maclaurin_oracle_accuracy():
    z, zp = euler_maclaurin_zeta(0.0)
    assert abs(z - (-0.5)) < 1e-10
    assert abs(zp - (-math.log(2 * math.pi) / 2)) < 1e-10
    # sanity away from 0: zeta(2) = pi^2/6
    z2, _ = euler_maclaurin_zeta(2.0)
    assert z2 == pytest.approx(math.pi ** 2 / 6, rel=1e-12)


def test_scale_law(rng):
    for _ in range(30):
        a = float(rng.uniform(0.1, 10.0))
        x = float(rng.uniform(-2.0, 3.0))
        kappa = float(rng.uniform(0.1, 50.0))
        lhs = regularized_det(PowerSpectrumOperator(kappa * a, x))
        rhs = regularized_det(PowerSpectrumOperator(a, x)) / math.sqrt(kappa)
        assert lhs == pytest.approx(rhs, rel=1e-14)


def test_naive_product_diverges_while_regularized_is_finite():
    op = PowerSpectrumOperator(a=2.0, x=2.0)
    logs = [naive_log_partial_product(op, n) for n in (10, 100, 1000, 10000)]
    assert logs[0] < logs[1] < logs[2] < logs[3]
    # growth follows x * log(N!) + N log a
    for n, val in zip((10, 100, 1000, 10000), logs):
        direct = float(np.sum(np.log(op.eigenvalue(np.arange(1, n + 1)))))
        assert val == pytest.approx(direct, rel=1e-12)
    # while the zeta-regularized value does not depend on N at all
    assert regularized_det(op) == pytest.approx(2 * math.pi / math.sqrt(2.0), rel=1e-14)


def test_invalid_inputs():
    with pytest.raises(UsageError):
        PowerSpectrumOperator(a=0.0, x=2.0)
    with pytest.raises(UsageError):
        fp_determinant(-1.0)
    with pytest.raises(UsageError):
        euler_maclaurin_zeta(1.0)
