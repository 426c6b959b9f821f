import os
import subprocess
import sys

import numpy as np
import pytest

from rigidemt._kernels import BACKEND, _fallback
from rigidemt.oracle import discretize
from rigidemt import PRESETS

core = pytest.importorskip("rigidemt._kernels._core", reason="compiled extension not built")


@pytest.mark.skipif(os.environ.get("RIGIDEMT_PURE_PYTHON") == "1", reason="fallback forced")
def test_compiled_backend_selected():
    assert BACKEND == "compiled"


def test_laurent_mul_agrees():
    rng = np.random.default_rng(0)
    a = rng.normal(size=17) + 1j * rng.normal(size=17)
    b = rng.normal(size=9) + 1j * rng.normal(size=9)
    np.testing.assert_allclose(core.laurent_mul(a, b), _fallback.laurent_mul(a, b), rtol=1e-14)
    np.testing.assert_allclose(core.laurent_mul(a, b), np.convolve(a, b), rtol=1e-13)


def test_boundary_matrices_agree():
    bd = discretize(PRESETS["egg"], 64)
    R1, U1 = core.kelvin_boundary_matrices(bd.z, bd.dz, bd.t)
    R2, U2 = _fallback.kelvin_boundary_matrices(bd.z, bd.dz, bd.t)
    np.testing.assert_allclose(R1, R2, atol=1e-13)
    np.testing.assert_allclose(U1, U2, atol=1e-13)


def test_kelvin_apply_agrees():
    bd = discretize(PRESETS["trilobe"], 128)
    rng = np.random.default_rng(1)
    psi = rng.normal(size=128) + 1j * rng.normal(size=128)
    tg = 2.0 * np.exp(1j * np.linspace(0, 6, 11))
    a = core.kelvin_apply(tg, bd.z, psi, 2 * np.pi / 128, 0.6, 0.2)
    b = _fallback.kelvin_apply(tg, bd.z, psi, 2 * np.pi / 128, 0.6, 0.2)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


def test_environment_forces_fallback():
    env = dict(os.environ, RIGIDEMT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import rigidemt; print(rigidemt.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
