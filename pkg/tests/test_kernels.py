import importlib
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from edgeperf import _kernels_py, kernels

try:
    _c = importlib.import_module("edgeperf._kernels")
except ImportError:  # pragma: no cover - build without a compiler
    _c = None

needs_c = pytest.mark.skipif(_c is None, reason="compiled kernels not built")

coarse = st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0])


@needs_c
@settings(max_examples=200)
@given(
    arrays(np.float64, st.integers(1, 60), elements=coarse),
    st.data(),
)
def test_backends_agree(precision, data):
    total = data.draw(arrays(np.float64, precision.shape, elements=st.sampled_from([1.0, 2.0, 3.0])))
    limits = data.draw(st.lists(st.sampled_from([0.5, 1.0, 1.5, 2.0, 3.0]), min_size=1, max_size=5))
    floors = data.draw(st.lists(coarse, min_size=1, max_size=5))
    np.testing.assert_array_equal(_c.select_p1(total, precision, limits), _kernels_py.select_p1(total, precision, limits))
    np.testing.assert_array_equal(_c.select_p2(total, precision, floors), _kernels_py.select_p2(total, precision, floors))


def test_python_kernel_tie_breaks():
    total = np.array([2.0, 1.0, 1.0, 3.0])
    prec = np.array([0.5, 0.5, 0.5, 0.9])
    assert list(_kernels_py.select_p1(total, prec, [2.5, 3.0, 0.5])) == [1, 3, -1]
    assert list(_kernels_py.select_p2(total, prec, [0.0, 0.6, 0.95])) == [1, 3, -1]


def test_backend_selection_env():
    code = "import edgeperf.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, EDGEPERF_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND in ("python", "cython")
    if _c is not None and os.environ.get("EDGEPERF_PURE_PYTHON") is None:
        assert kernels.BACKEND == "cython"
