import numpy as np
import pytest

from fermatwave import IndexField


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def hom3d():
    return IndexField.homogeneous(1.5, [-5, -5, -5], [5, 5, 5])


@pytest.fixture
def strat3d():
    # n = 1 + 0.05 y, mild stratification
    return IndexField.linear_stratified(1.0, 0.05, 1, [-8, -8, -8], [8, 8, 8])


@pytest.fixture
def grin2d():
    # guiding parabolic profile around the x-axis
    return IndexField.parabolic_grin(1.4, 0.25, 0, [-40, -3, ], [40, 3])


@pytest.fixture
def grin3d():
    return IndexField.parabolic_grin(1.4, 0.25, 2, [-2, -2, -40], [2, 2, 40])
