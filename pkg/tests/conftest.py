import numpy as np
import pytest

from collarlab import Disc, TwoLevelDensity, unit_square, uniform_density


@pytest.fixture(scope="session")
def disc():
    return Disc((0.0, 0.0), 1.0)


@pytest.fixture(scope="session")
def square():
    return unit_square()


@pytest.fixture(scope="session")
def uniform16():
    """Uniform ambient density 1/16 on [-2, 2]^2."""
    return uniform_density(2.0)


@pytest.fixture(scope="session")
def two_level():
    """c_in = 2 c_out on [-2, 2]^2, normalized for the unit disc."""
    c_out = 1.0 / (16.0 + np.pi)
    return TwoLevelDensity(2.0 * c_out, c_out, 2.0)
