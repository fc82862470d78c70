import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from convarb import kernels

pytestmark = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")

shapes = st.tuples(st.integers(1, 6), st.integers(1, 30), st.integers(0, 2**31 - 1))


def _draw(shape, seed, scale=1.0):
    n_paths, n, _ = shape
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n_paths, n)) * scale


@given(shapes)
def test_ou_euler_backends_agree(shape):
    n_paths, n, seed = shape
    dW = _draw(shape, seed, 0.1)
    dt = np.full(n, 1.0 / n)
    x0 = np.linspace(-1, 1, n_paths)
    a = kernels.ou_euler(x0, -0.7, dt, dW, impl="python")
    b = kernels.ou_euler(x0, -0.7, dt, dW, impl="cython")
    np.testing.assert_array_equal(a, b)


@given(shapes)
def test_kalman_bucy_backends_agree(shape):
    n_paths, n, seed = shape
    dW = _draw(shape, seed, 0.1)
    x = _draw(shape, seed + 1)
    dt = np.full(n, 1.0 / n)
    gain = np.tanh(np.cumsum(dt) - dt)
    for a, b in zip(kernels.kalman_bucy(x, dW, gain, dt, 0.0, impl="python"),
                    kernels.kalman_bucy(x, dW, gain, dt, 0.0, impl="cython")):
        np.testing.assert_array_equal(a, b)


@given(shapes)
def test_absorb_scan_backends_agree(shape):
    n_paths, n, seed = shape
    dX, dY = _draw(shape, seed), _draw(shape, seed + 1)
    x0 = np.full(n_paths, 1.5)
    a = kernels.absorb_scan(x0, x0, dX, dY, impl="python")
    b = kernels.absorb_scan(x0, x0, dX, dY, impl="cython")
    np.testing.assert_array_equal(a, b)
    assert np.all((a >= 0) & (a <= 1))


@given(shapes)
def test_doleans_backends_agree(shape):
    n_paths, n, seed = shape
    cont = _draw(shape, seed, 0.1)
    qv = cont**2
    jumps = np.where(_draw(shape, seed + 1) > 1.5, -0.5, 0.0)
    a = kernels.doleans(cont, qv, jumps, impl="python")
    b = kernels.doleans(cont, qv, jumps, impl="cython")
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=0)


def test_single_path_shape():
    out = kernels.doleans(np.zeros(4), np.zeros(4), np.zeros(4))
    np.testing.assert_array_equal(out, np.ones(5))


def test_absorb_scan_fraction():
    frac = kernels.absorb_scan(1.0, 2.0, np.array([-0.5, -1.0, 1.0]), np.zeros(3))
    np.testing.assert_array_equal(frac, [1.0, 0.5, 0.0])


def test_backend_selection():
    assert kernels.backend("python") is kernels._fallback
    assert kernels.backend() is kernels.backend("cython")
    with pytest.raises(ValueError):
        kernels.backend("fortran")


def test_env_forces_fallback():
    env = dict(os.environ, CONVARB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from convarb import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
