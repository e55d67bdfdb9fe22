import numpy as np
import pytest

from adaptaug import kernels


def random_series(rng: np.random.Generator, length: int) -> np.ndarray:
    return rng.normal(0.0, 1.0, length)


@pytest.fixture
def gen() -> np.random.Generator:
    return np.random.default_rng(20260810)


@pytest.fixture(params=kernels.available_backends())
def kernel_backend(request):
    """Run a test under each available kernel backend, restoring afterwards."""
    previous = kernels.backend_name()
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(previous)
