import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from closure14 import _pykernels, kernels
from closure14.packed import PackedSeries
from closure14.ring import ExpFamily
from closure14.series import random_points
from closure14.solutions import build_H1

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "benchmarks"))
from bench_eval import kernel_inputs  # noqa: E402


def test_compiled_kernel_agrees_with_numpy():
    ck = pytest.importorskip("closure14._ckernels")
    args, _ = kernel_inputs(5, 200, seed=3)
    ref = _pykernels.eval_batch(*args)
    got = ck.eval_batch(*args)
    assert got.shape == ref.shape
    assert np.max(np.abs(got - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_compiled_kernel_is_selected_when_built():
    try:
        import closure14._ckernels  # noqa: F401
    except ImportError:
        assert kernels.BACKEND == "python"
    else:
        expected = "python" if os.environ.get("CLOSURE14_PURE_PYTHON") else "cython"
        assert kernels.BACKEND == expected


def test_pure_python_switch():
    env = dict(os.environ, CLOSURE14_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import closure14; print(closure14.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_packed_evaluation_matches_series_evaluation():
    H = build_H1(5)
    pts = random_points(10, seed=4)
    real = ExpFamily()
    packed = PackedSeries.from_series(H).evaluate_many(pts, real)
    direct = np.array([H.evaluate(p, real) for p in pts], dtype=float)
    assert np.allclose(packed.reshape(direct.shape), direct, rtol=1e-12, atol=1e-12)
