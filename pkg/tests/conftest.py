import numpy as np
import pytest

from twomode import _kernels


@pytest.fixture(scope="session", autouse=True)
def compiled_kernels():
    """Pay the jit cost once, up front."""
    _kernels.warm_up()


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
