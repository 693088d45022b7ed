import os
import subprocess
import sys

import numpy as np

from selfsim import BACKEND
from selfsim.kernels import compiled_backend, euler, python_backend


def test_selected_backend():
    if compiled_backend is None:
        assert euler is python_backend and BACKEND == "python"
    else:
        assert euler is compiled_backend and BACKEND == "cython"


def test_fallback_forced_by_environment():
    env = dict(os.environ, SELFSIM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import selfsim; print(selfsim.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_batch_kernels_agree_with_pointwise(rng):
    us = np.array([1.0, 2.0, 0.0, 3.7857142857142865]) + 1e-3 * rng.standard_normal((5, 4))
    for k in filter(None, (python_backend, compiled_backend)):
        np.testing.assert_allclose(k.flux_batch(us, 1.4, 1), [k.flux(u, 1.4, 1) for u in us],
                                   rtol=1e-14)
        ax, ay = k.jacobians_batch(us, 1.4)
        np.testing.assert_allclose(ax[2], k.jacobians(us[2], 1.4)[0], rtol=1e-14)
