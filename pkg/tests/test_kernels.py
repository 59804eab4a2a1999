import os
import subprocess
import sys

import numpy as np
import pytest

from camforge import kernels

BACKENDS = kernels.available_backends()
needs_two = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")


def both(fn, *args):
    return [fn(*args, impl=m) for m in BACKENDS.values()]


def test_default_prefers_compiled():
    assert kernels.BACKEND == next(iter(BACKENDS))


def test_env_forces_fallback():
    env = dict(os.environ, CAMFORGE_NO_EXT="1")
    out = subprocess.run([sys.executable, "-c", "import camforge; print(camforge.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


@needs_two
def test_parity_grid_sample(rng):
    img = rng.random((13, 17, 3))
    grid = rng.uniform(-1.3, 1.3, size=(9, 11, 2))
    a, b = both(kernels.grid_sample_bicubic, img, grid)
    np.testing.assert_allclose(a, b, atol=1e-12)


@needs_two
@pytest.mark.parametrize("s", [0.5, 1.7, 4.0])
def test_parity_flow_blur(rng, s):
    img = rng.random((12, 14, 3))
    flow = rng.normal(scale=3, size=(12, 14, 2))
    a, b = both(kernels.flow_blur, img, flow, s, 24)
    np.testing.assert_allclose(a, b, atol=1e-12)


@needs_two
def test_parity_bokeh_scatter(rng):
    lin = rng.random((15, 18, 3))
    radius = rng.uniform(0.5, 4.0, size=(15, 18))
    (acc_a, w_a), (acc_b, w_b) = both(kernels.bokeh_scatter, lin, radius)
    np.testing.assert_allclose(acc_a, acc_b, atol=1e-12)
    np.testing.assert_allclose(w_a, w_b, atol=1e-12)


def test_correlate_matches_direct(rng):
    img = rng.random((8, 9, 3))
    k = rng.random((3, 5))
    pad = np.pad(img, ((1, 1), (2, 2), (0, 0)), mode="edge")
    ref = np.zeros_like(img)
    for dy in range(3):
        for dx in range(5):
            ref += k[dy, dx] * pad[dy:dy + 8, dx:dx + 9]
    np.testing.assert_allclose(kernels.correlate_clamped(img, k), ref, atol=1e-12)
