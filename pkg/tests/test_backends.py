import os
import subprocess
import sys

import numpy as np
import pytest

from pointwave import _kernels_py as py
from pointwave import kernels

compiled = pytest.importorskip("pointwave._kernels")

RNG = np.random.default_rng(7)


def test_selected_backend_reported():
    assert kernels.BACKEND in ("compiled", "python")
    env = dict(os.environ, POINTWAVE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from pointwave import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_rk4_first_model():
    n, dt = 400, 0.01
    q01 = np.ascontiguousarray(np.sin(0.7 * dt * 0.5 * np.arange(2 * n - 1)))
    f0 = np.ascontiguousarray(0.1 * np.cos(dt * 0.5 * np.arange(2 * n - 1)))
    a = py.rk4_first_model(1.0, 0.1, 0.3, -0.2, q01, f0, dt, n)
    b = compiled.rk4_first_model(1.0, 0.1, 0.3, -0.2, q01, f0, dt, n)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-14)


def test_rk4_standard_model():
    n, dt = 400, 0.01
    phi = np.ascontiguousarray(np.sin(0.7 * dt * 0.5 * np.arange(2 * n - 1)))
    f0 = np.zeros(2 * n - 1)
    a = py.rk4_standard_model(1.0, 0.5, 0.5, 1.0, 0.0, phi, f0, dt, n)
    b = compiled.rk4_standard_model(1.0, 0.5, 0.5, 1.0, 0.0, phi, f0, dt, n)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)


@pytest.mark.parametrize("scheme, courant", [(0, 0.5), (0, 1.0), (1, 1.0)])
@pytest.mark.parametrize("has_f1", [False, True])
def test_pde_advance(scheme, courant, has_f1):
    nx, n = 81, 40
    dx = 0.05
    dt = courant * dx
    j0 = 40
    xs = dx * (np.arange(nx) - j0)
    results = []
    for mod in (py, compiled):
        u_prev = np.exp(-(xs + 0.5) ** 2)
        u_cur = np.exp(-(xs + 0.5 - dt) ** 2)
        osc = np.array([0.2, 0.1, 0.0, 0.0])
        f0 = np.ascontiguousarray(0.05 * np.sin(dt * np.arange(n)))
        block = np.full((n - 2, nx), 0.01) if has_f1 else np.zeros((0, nx))
        edge = np.full((n, 4), 0.01)
        q, Q, v = np.zeros(n), np.zeros(n), np.zeros(n)
        mod.pde_advance(scheme, courant, dt, dx, 1.0, j0, u_prev, u_cur, 1, n - 1, osc, 1.0, 0.2, -0.2, 1.0,
                        f0, block, has_f1, edge, q, Q, v)
        results.append((u_cur, osc, q, Q, v))
    for x, y in zip(*results):
        np.testing.assert_allclose(x, y, rtol=0, atol=1e-13)


def test_volterra_kernels():
    K = np.ascontiguousarray(np.linspace(0.1, 0.5, 12))
    x = np.ascontiguousarray(RNG.standard_normal(60))
    np.testing.assert_allclose(py.product_integral(K, 0.5, x, 0.01), compiled.product_integral(K, 0.5, x, 0.01),
                               rtol=0, atol=1e-15)
    rhs = np.ascontiguousarray(RNG.standard_normal(60))
    np.testing.assert_allclose(py.volterra2_solve(K, 0.5, 0.4, 0.01, rhs, x),
                               compiled.volterra2_solve(K, 0.5, 0.4, 0.01, rhs, x), rtol=0, atol=1e-14)
    prefix = np.ascontiguousarray(np.cumsum(x))
    for m in (1, 5, 30, 59):
        assert py.history_sum(K, 0.5, x, m, prefix) == pytest.approx(
            compiled.history_sum(K, 0.5, x, m, prefix), abs=1e-13)
    q01 = np.ascontiguousarray(np.sin(0.01 * np.arange(60)))
    f0 = np.zeros(60)
    a = py.nonlocal_march(K, 0.5, 0.4, 1.0, q01, f0, f0, 1.0, 0.0, 0.01)
    b = compiled.nonlocal_march(K, 0.5, 0.4, 1.0, q01, f0, f0, 1.0, 0.0, 0.01)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)
