import os
import subprocess
import sys

import numpy as np
import pytest

from dtstyle import _kernels_numpy as knp
from dtstyle.accel import HAS_NUMBA

pytestmark = pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")

if HAS_NUMBA:
    from dtstyle import _kernels_numba as knb


def test_conv_forward_backends_agree():
    rng = np.random.default_rng(0)
    for _ in range(5):
        c_in = int(rng.integers(1, 5))
        c_out = int(rng.integers(1, 5))
        h, w = int(rng.integers(1, 10)), int(rng.integers(1, 10))
        x = rng.normal(size=(c_in, h, w))
        k = rng.normal(size=(c_out, c_in, 3, 3))
        b = rng.normal(size=c_out)
        np.testing.assert_allclose(
            knb.conv3x3_forward(x, k, b), knp.conv3x3_forward(x, k, b),
            rtol=1e-12, atol=1e-12)


def test_pool_backends_agree_exactly():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(3, 8, 6))
    out_nb, arg_nb = knb.pool2x2_max_forward(x)
    out_np, arg_np = knp.pool2x2_max_forward(x)
    np.testing.assert_array_equal(out_nb, out_np)
    np.testing.assert_array_equal(arg_nb, arg_np)
    g = rng.normal(size=out_nb.shape)
    np.testing.assert_array_equal(
        knb.pool2x2_max_backward(g, arg_nb, 8, 6),
        knp.pool2x2_max_backward(g, arg_np, 8, 6))
    np.testing.assert_allclose(
        knb.pool2x2_avg_forward(x), knp.pool2x2_avg_forward(x), rtol=1e-15)
    np.testing.assert_array_equal(
        knb.pool2x2_avg_backward(g, 8, 6), knp.pool2x2_avg_backward(g, 8, 6))


def test_pool_tie_break_matches_across_backends():
    x = np.zeros((1, 4, 4))
    x[0, 1, 1] = x[0, 1, 0] = 7.0  # tie inside the first window
    _, arg_nb = knb.pool2x2_max_forward(x)
    _, arg_np = knp.pool2x2_max_forward(x)
    np.testing.assert_array_equal(arg_nb, arg_np)
    assert arg_nb[0, 0, 0] == 2  # (1,0) is first in scan order among the tied


def test_edt_backends_agree_exactly():
    rng = np.random.default_rng(2)
    for _ in range(40):
        h = int(rng.integers(1, 24))
        w = int(rng.integers(1, 24))
        fg = (rng.random((h, w)) < 0.2).astype(np.uint8)
        if not fg.any():
            fg[rng.integers(0, h), rng.integers(0, w)] = 1
        np.testing.assert_array_equal(knb.edt_sq(fg), knp.edt_sq(fg))


def test_env_flag_forces_numpy_backend():
    code = "import dtstyle; print(dtstyle.backend_name())"
    env = dict(os.environ, DTSTYLE_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env = dict(os.environ, DTSTYLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"
