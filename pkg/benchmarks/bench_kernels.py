"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Sizes are chosen so the Python side finishes in seconds; the compiled
side is also timed at production size.
"""
import argparse
import time

import numpy as np

from pointwave import _kernels_py

try:
    from pointwave import _kernels as _compiled
except ImportError:
    _compiled = None


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(n_ode, n_grid, n_volterra):
    dt = 1e-3
    half = np.ascontiguousarray(np.sin(0.5 * dt * np.arange(2 * n_ode - 1)))
    zeros_half = np.zeros(2 * n_ode - 1)

    def rk4_first(mod):
        return lambda: mod.rk4_first_model(1.0, 0.1, 1.0, 0.0, half, zeros_half, dt, n_ode)

    def rk4_standard(mod):
        return lambda: mod.rk4_standard_model(1.0, 0.5, 0.5, 1.0, 0.0, half, zeros_half, dt, n_ode)

    nx, dx = 2 * n_grid + 1, 1e-2
    xs = dx * (np.arange(nx) - n_grid)

    def pde(mod, code):
        def run():
            u_prev, u_cur = np.exp(-xs ** 2), np.exp(-(xs - dx) ** 2)
            osc = np.array([1.0, 0.0, 0.0, 0.0])
            q, Q, v = (np.zeros(n_grid) for _ in range(3))
            mod.pde_advance(code, 1.0, dx, dx, 1.0, n_grid, u_prev, u_cur, 1, n_grid - 1, osc, 1.0, 0.2,
                            -0.2, 1.0, np.zeros(n_grid), np.zeros((0, nx)), False, np.zeros((n_grid, 4)),
                            q, Q, v)
        return run

    K = np.ascontiguousarray(0.5 * np.tanh(np.arange(200) / 40.0))
    x = np.ascontiguousarray(np.sin(0.01 * np.arange(n_volterra)))
    zeros = np.zeros(n_volterra)

    def march(mod):
        return lambda: mod.nonlocal_march(K, 0.5, 0.4, 1.0, x, zeros, zeros, 1.0, 0.0, 0.01)

    def volterra(mod):
        return lambda: mod.volterra2_solve(K, 0.5, 0.4, 0.01, x, x)

    def product(mod):
        return lambda: mod.product_integral(K, 0.5, x, 0.01)

    return {
        f"rk4_first_model n={n_ode}": rk4_first,
        f"rk4_standard_model n={n_ode}": rk4_standard,
        f"pde_advance nearest {nx}x{n_grid}": lambda mod: pde(mod, 0),
        f"pde_advance exact {nx}x{n_grid}": lambda mod: pde(mod, 1),
        f"nonlocal_march n={n_volterra} M=200": march,
        f"volterra2_solve n={n_volterra} M=200": volterra,
        f"product_integral n={n_volterra} M=200": product,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if _compiled is None:
        print("compiled extension not built; only the fallback can be timed")

    print(f"{'kernel':40s} {'python [s]':>12s} {'compiled [s]':>13s} {'speedup':>9s}")
    for name, make in cases(20_000, 400, 4_000).items():
        t_py = _best(make(_kernels_py), 1)
        t_c = _best(make(_compiled), args.repeat) if _compiled else float("nan")
        print(f"{name:40s} {t_py:12.4f} {t_c:13.5f} {t_py / t_c:8.0f}x")

    if _compiled is not None:
        print("\ncompiled, production size")
        for name, make in cases(2_000_000, 5_000, 200_000).items():
            print(f"{name:40s} {_best(make(_compiled), args.repeat):13.4f} s")


if __name__ == "__main__":
    main()
