"""Non-local coupling through a mollified delta.

The field returns the interaction to the coupling point through the
stationary memory kernel

    K0(lag) = (P(c lag) - P(-c lag)) / (2c),

P being any primitive of the mollifier. Time integrals against K0 use
trapezoidal product integration on the uniform grid; the diagonal weight
uses the one-sided limit lag -> 0+, which is what makes the Dirac limit
(P = unit step, K0 = 1/(2c)) telescope exactly into the local equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from . import kernels
from .errors import IllConditionedStepError, NewtonConvergenceError
from .model_core import (FieldConfig, Forcing, InitialData, OscillatorParams, TimeGrid,
                         Trajectory, q01_series, quad)
from .reduced_ode import sample

PIVOT_EPS = 1e-12
NEWTON_MAX_ITER = 50


@dataclass(frozen=True)
class Mollifier:
    """Unit-mass bump around the coupling point, as functions of the offset x - x0."""
    shape: Optional[Callable]
    primitive: Callable
    width: float
    name: str = "custom"

    @classmethod
    def gaussian(cls, width):
        """Normal density with standard deviation ``width``."""
        if not width > 0:
            raise ValueError("width must be > 0")
        norm = 1.0 / (width * math.sqrt(2.0 * math.pi))
        scale = 1.0 / (width * math.sqrt(2.0))
        return cls(shape=lambda x: norm * np.exp(-0.5 * (np.asarray(x) / width) ** 2),
                   primitive=lambda x: 0.5 * (1.0 + special.erf(np.asarray(x) * scale)),
                   width=float(width), name="gaussian")

    @classmethod
    def bump(cls, width):
        """Raised cosine (1 + cos(pi x / width)) / (2 width) on |x| < width."""
        if not width > 0:
            raise ValueError("width must be > 0")
        a = float(width)

        def shape(x):
            x = np.asarray(x, dtype=float)
            return np.where(np.abs(x) < a, (1.0 + np.cos(np.pi * x / a)) / (2.0 * a), 0.0)

        def primitive(x):
            x = np.clip(np.asarray(x, dtype=float), -a, a)
            return 0.5 + x / (2.0 * a) + np.sin(np.pi * x / a) / (2.0 * np.pi)

        return cls(shape=shape, primitive=primitive, width=a, name="bump")

    @classmethod
    def dirac(cls):
        """Zero-width limit: primitive is the unit step with step(0) = 0."""
        return cls(shape=None, primitive=lambda x: np.where(np.asarray(x) > 0, 1.0, 0.0),
                   width=0.0, name="dirac")

    @classmethod
    def from_shape(cls, shape, width, support=math.inf):
        """User density; the primitive is built by quadrature from -support."""
        lo = -support

        def primitive(x):
            x = np.asarray(x, dtype=float)
            out = np.array([quad(shape, lo, float(v)) if v > lo else 0.0 for v in x.ravel()])
            return out.reshape(x.shape)[()] if x.ndim == 0 else out.reshape(x.shape)

        m = cls(shape=shape, primitive=primitive, width=float(width), name="custom")
        mass = m.mass()
        if abs(mass - 1.0) > 1e-8:
            raise ValueError(f"mollifier mass is {mass}, expected 1")
        return m

    def with_offset(self, const):
        """Same mollifier, primitive shifted by a constant."""
        prim = self.primitive
        return Mollifier(self.shape, lambda x: prim(x) + const, self.width, self.name)

    def mass(self) -> float:
        return float(self.primitive(np.inf) - self.primitive(-np.inf))


@dataclass(frozen=True)
class MemoryKernel:
    c: float
    mollifier: Mollifier
    stationary: bool = True

    def eval(self, t, tau):
        lag = np.asarray(t, dtype=float) - np.asarray(tau, dtype=float)
        return self.of_lag(lag)

    def of_lag(self, lag):
        c, P = self.c, self.mollifier.primitive
        lag = np.asarray(lag, dtype=float)
        return (P(c * lag) - P(-c * lag)) / (2.0 * c)

    @property
    def tail_value(self) -> float:
        return self.mollifier.mass() / (2.0 * self.c)

    def lag_values(self, dt, n):
        """(K, k_inf): K[m] = K0(m dt) for m <= M, and K0 == k_inf beyond M.

        K[0] is the lag -> 0+ limit.
        """
        lags = dt * np.arange(n, dtype=float)
        lags[0] = np.nextafter(0.0, 1.0)
        K = np.asarray(self.of_lag(lags), dtype=float)
        k_inf = self.tail_value
        off = np.nonzero(K != k_inf)[0]
        M = int(off[-1]) if len(off) else 0
        return np.ascontiguousarray(K[:M + 1]), k_inf


def build_kernel(cfg: FieldConfig, m: Mollifier) -> MemoryKernel:
    return MemoryKernel(c=cfg.c, mollifier=m)


def _samples(fn_or_array, grid):
    if fn_or_array is None:
        return np.zeros(grid.n)
    if callable(fn_or_array):
        return sample(fn_or_array, grid.times)
    arr = np.asarray(fn_or_array, dtype=float)
    if arr.shape != (grid.n,):
        raise ValueError(f"sampled input has shape {arr.shape}, expected ({grid.n},)")
    return arr


def solve_q_nonlocal(cfg: FieldConfig, params: OscillatorParams, kernel: MemoryKernel, q01,
                     forcing: Optional[Forcing], init: InitialData, grid: TimeGrid) -> Trajectory:
    """q from (1 + 4 gamma c K) q'' = -omega^2 q + omega^2 Q01 + (1 + 4 gamma c K) f0,
    then Q from Q = Q01 - 4 gamma c K(Q - q).

    ``q01`` may be a callable or samples on ``grid``.
    """
    if grid.s != cfg.s:
        raise ValueError(f"grid starts at {grid.s} but the field starts at s={cfg.s}")
    coef = 4.0 * params.gamma * cfg.c
    dt = grid.dt
    K, k_inf = kernel.lag_values(dt, grid.n)
    diag = 1.0 + coef * dt * 0.5 * K[0]
    full = diag + 0.25 * params.omega ** 2 * dt * dt
    if abs(diag) < PIVOT_EPS or abs(full) < PIVOT_EPS:
        raise IllConditionedStepError(f"diagonal pivot {diag:.3e} at dt={dt}")
    q01s = np.ascontiguousarray(_samples(q01, grid))
    f0 = np.ascontiguousarray(_samples(forcing.f0 if forcing else None, grid))
    if0 = kernels.product_integral(K, k_inf, f0, dt) if np.any(f0) else np.zeros(grid.n)
    y = kernels.nonlocal_march(K, k_inf, coef, params.omega, q01s, f0, np.ascontiguousarray(if0),
                               float(init.q_init), float(init.qdot_init), dt)
    q = np.ascontiguousarray(y[:, 0])
    big_q = kernels.volterra2_solve(K, k_inf, coef, dt, q01s, q)
    return Trajectory(grid=grid, q=q, big_q=big_q, qdot=y[:, 1])


def general_closure(cfg: FieldConfig, kernel: MemoryKernel, u0_interaction, f_pf,
                    init: InitialData, grid: TimeGrid, q01=None, tol=1e-12,
                    max_iter=NEWTON_MAX_ITER) -> Trajectory:
    """Q = Q01 - int K0 U0(tau, Q, q) dtau together with q'' = f_pf(q, Q, t).

    ``u0_interaction(t, Q, q)`` and ``f_pf(q, Q, t)`` (force per unit mass)
    may be nonlinear. Each step solves for (q_n, Q_n) by Newton with a
    finite-difference Jacobian; q advances by the trapezoidal (Newmark)
    rule. ``q01`` defaults to the free field of ``init`` at x0.
    """
    if grid.s != cfg.s:
        raise ValueError(f"grid starts at {grid.s} but the field starts at s={cfg.s}")
    n, dt = grid.n, grid.dt
    ts = grid.times
    q01s = q01_series(cfg, init, None, grid) if q01 is None else _samples(q01, grid)
    K, k_inf = kernel.lag_values(dt, n)
    K = np.ascontiguousarray(K)
    half_k0 = 0.5 * dt * K[0]

    q = np.zeros(n)
    Q = np.zeros(n)
    v = np.zeros(n)
    acc = np.zeros(n)
    U = np.zeros(n)
    prefix = np.zeros(n)
    q[0], v[0], Q[0] = float(init.q_init), float(init.qdot_init), q01s[0]
    acc[0] = f_pf(q[0], Q[0], ts[0])
    U[0] = u0_interaction(ts[0], Q[0], q[0])
    prefix[0] = U[0]

    for i in range(1, n):
        t = ts[i]
        base_q = q[i - 1] + dt * v[i - 1] + 0.25 * dt * dt * acc[i - 1]
        rhs_Q = q01s[i] - dt * kernels.history_sum(K, k_inf, U, i, prefix)

        def residual(z):
            qi, Qi = z
            return np.array([qi - base_q - 0.25 * dt * dt * f_pf(qi, Qi, t),
                             Qi + half_k0 * u0_interaction(t, Qi, qi) - rhs_Q])

        z = np.array([base_q + 0.25 * dt * dt * acc[i - 1], Q[i - 1]])
        r = residual(z)
        for it in range(max_iter):
            jac = np.empty((2, 2))
            for j in range(2):
                h = 1e-7 * (1.0 + abs(z[j]))
                zp = z.copy()
                zp[j] += h
                jac[:, j] = (residual(zp) - r) / h
            try:
                dz = np.linalg.solve(jac, -r)
            except np.linalg.LinAlgError as exc:
                raise NewtonConvergenceError(f"singular Jacobian at step {i}", step=i,
                                             residual=float(np.max(np.abs(r)))) from exc
            z = z + dz
            r = residual(z)
            if np.max(np.abs(dz)) <= tol * (1.0 + np.max(np.abs(z))) and np.max(np.abs(r)) <= 1e3 * tol:
                break
        else:
            raise NewtonConvergenceError(
                f"Newton did not converge in {max_iter} iterations at step {i} (t={t:.6g})",
                step=i, residual=float(np.max(np.abs(r))))
        q[i], Q[i] = z
        acc[i] = f_pf(q[i], Q[i], t)
        v[i] = v[i - 1] + 0.5 * dt * (acc[i - 1] + acc[i])
        U[i] = u0_interaction(t, Q[i], q[i])
        prefix[i] = prefix[i - 1] + U[i]
    return Trajectory(grid=grid, q=q, big_q=Q, qdot=v)


def volterra_residual(traj: Trajectory, kernel: MemoryKernel, q01, u0_interaction,
                      method="trapezoid", indices=None):
    """Q - Q01 + int_s^t K0(t - tau) U0(tau) dtau on the trajectory.

    ``trapezoid`` re-evaluates with the solver's own product rule.
    ``quad`` integrates a cubic spline of U0 against the exact kernel by
    adaptive quadrature, at ``indices`` (default: 20 evenly spaced).
    """
    grid = traj.grid
    ts = traj.times
    U = np.array([u0_interaction(t, Qv, qv) for t, Qv, qv in zip(ts, traj.big_q, traj.q)])
    q01s = _samples(q01, grid)
    if method == "trapezoid":
        K, k_inf = kernel.lag_values(grid.dt, grid.n)
        I = kernels.product_integral(np.ascontiguousarray(K), k_inf, np.ascontiguousarray(U), grid.dt)
        return traj.big_q - q01s + I
    if method != "quad":
        raise ValueError(f"unknown method {method!r}")
    if indices is None:
        indices = np.unique(np.linspace(1, grid.n - 1, 20).astype(int))
    spline = CubicSpline(ts, U)
    out = []
    for i in indices:
        t = ts[i]
        val, _ = integrate.quad(lambda tau: float(kernel.of_lag(t - tau)) * float(spline(tau)),
                                ts[0], t, limit=2000, epsabs=1e-12, epsrel=1e-12)
        out.append(traj.big_q[i] - q01s[i] + val)
    return np.array(out)
