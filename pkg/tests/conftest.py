import numpy as np
import pytest

from qclab.field_ops import GridSpec


@pytest.fixture(scope="session")
def grid256():
    return GridSpec(2.0, 256)


@pytest.fixture(scope="session")
def grid128():
    return GridSpec(2.0, 128)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
