import numpy as np
import pytest

from momentfit.builtins import (
    moments_absx,
    moments_ex1_sum,
    moments_indicator_half,
)


@pytest.fixture
def absx_moments():
    return moments_absx


@pytest.fixture
def ex1_moments():
    return moments_ex1_sum


@pytest.fixture
def indicator_half_moments():
    return moments_indicator_half


@pytest.fixture
def grid_1d_unit():
    return np.linspace(0.0, 1.0, 2001).reshape(-1, 1)
