import os
import subprocess
import sys

import numpy as np
import pytest

from realdet import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba disabled or missing")

MODES = np.arange(-4, 5, dtype=float)
COEFFS = np.exp(-np.abs(MODES)) * (1 + 0.5j * MODES)
DCOEFFS = 1j * MODES * COEFFS


@needs_numba
def test_series_backends_agree():
    z = np.linspace(0, 6, 50) + 1j * np.linspace(-0.5, 0.8, 50)
    a = _kernels.np_series(MODES, COEFFS, z)
    b = _kernels.nb_series(MODES, COEFFS, z)
    assert np.max(np.abs(a - b)) < 1e-13


@needs_numba
def test_series_with_non_integer_modes_falls_back():
    modes = np.array([0.5, 1.5])
    z = np.array([0.3 + 0.1j])
    assert _kernels.nb_series(modes, np.ones(2), z) == pytest.approx(_kernels.np_series(modes, np.ones(2), z))


@needs_numba
def test_flow_backends_agree():
    z0 = np.linspace(0, 6, 40).astype(complex)
    a = _kernels.np_flow(MODES, 0.1 * COEFFS, 0.1 * DCOEFFS, 0.05, 64, z0)
    b = _kernels.nb_flow(MODES, 0.1 * COEFFS, 0.1 * DCOEFFS, 0.05, 64, z0)
    assert np.max(np.abs(a[0] - b[0])) < 1e-14
    assert np.max(np.abs(a[1] - b[1])) < 1e-14
    assert a[2] == pytest.approx(b[2], abs=1e-14)


def test_flow_of_constant_field_is_translation():
    z0 = np.array([0.0 + 0.0j, 1.0 + 0.2j])
    z, p, top = _kernels.np_flow(np.array([0.0]), np.array([0.3j]), np.array([0j]), 1.0, 10, z0)
    assert np.allclose(z, z0 + 0.3j, atol=1e-15) and np.allclose(p, 1)
    assert top == pytest.approx(0.5)


def test_env_flag_selects_numpy_fallback():
    env = dict(os.environ, REALDET_NO_NUMBA="1")
    code = ("import realdet, numpy as np;"
            "from realdet.deformations import VectorField, flow;"
            "m = flow(VectorField.parse('i*sin(1)'), 0.04);"
            "print(realdet.backend(), repr(float(m.values().imag.max())))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    name, top = out.stdout.split()
    assert name == "numpy"
    from realdet.deformations import VectorField, flow
    here = flow(VectorField.parse("i*sin(1)"), 0.04).values().imag.max()
    assert float(top) == pytest.approx(here, abs=1e-14)
