import numpy as np
import pytest

from bvode import backend


@pytest.fixture(scope="session", autouse=True)
def warm_backend():
    # compile the jit lane once (no-op cost on the numpy lane)
    backend.warmup()


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)
