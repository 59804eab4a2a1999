import numpy as np
import pytest

from camforge import kernels
from camforge.scene import make_test_scene


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    return kernels.available_backends()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_scene():
    return make_test_scene(height=48, width=64, frames=4, seed=0)


@pytest.fixture(scope="session")
def other_scene():
    return make_test_scene(height=48, width=64, frames=4, seed=5)
