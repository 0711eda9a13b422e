"""Reduced (insulated) equations for both models, field reconstruction and
characteristic-root analysis.

First model state: (q, qdot, D, F) with D = Q - Q01 and F the running
integral of f0, so Q never needs the derivative of Q01. Standard model
state: (q0, qdot0, I) with I the running integral of q0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid, solve_ivp

from . import kernels
from .errors import OutOfRangeError, PointwaveError, StepSizeError
from .model_core import (FieldConfig, Forcing, InitialData, OscillatorParams, TimeGrid,
                         Trajectory, u01_function)

FIRST = "first_model"
STANDARD = "standard_model"
GROWTH_THRESHOLD = 1e-12


def _zero(t, x=None):
    return np.zeros(np.broadcast(np.asarray(t), np.asarray(0.0 if x is None else x)).shape)[()]


def sample(fn, times):
    """Evaluate a callable on an array of times, looping if it is scalar-only."""
    if fn is None:
        return np.zeros(len(times))
    try:
        vals = np.asarray(fn(times), dtype=float)
        if vals.shape == times.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(float(t))) for t in times])


@dataclass(frozen=True)
class ReducedSystem:
    """Data needed by the reduced equations.

    ``q01`` is Q01(t) (phi01(t) for the standard model) and ``u01`` the full
    free-plus-forced field used by the reconstruction.
    """
    kind: str
    params: OscillatorParams
    cfg: FieldConfig
    q01: Callable = _zero
    f0: Optional[Callable] = None
    u01: Callable = _zero
    field_is_zero: bool = True

    def __post_init__(self):
        if self.kind not in (FIRST, STANDARD):
            raise ValueError(f"kind must be {FIRST!r} or {STANDARD!r}, got {self.kind!r}")

    @classmethod
    def build(cls, kind, params, cfg, init: InitialData, forcing: Optional[Forcing] = None):
        forcing = forcing or Forcing()
        zero = init.field_is_zero and forcing.f1 is None
        if zero:
            return cls(kind, params, cfg, f0=forcing.f0)
        u01 = u01_function(cfg, init, forcing)
        return cls(kind, params, cfg, q01=lambda t: u01(t, cfg.x0), f0=forcing.f0, u01=u01,
                   field_is_zero=False)


# ---------------------------------------------------------------------------
# First model
# ---------------------------------------------------------------------------

def _check_grid(sys, grid):
    if grid.s != sys.cfg.s:
        raise ValueError(f"grid starts at {grid.s} but the field starts at s={sys.cfg.s}")


def _first_model_run(sys, init, grid):
    half = grid.half_times
    q01 = np.zeros(len(half)) if sys.field_is_zero else sample(sys.q01, half)
    f0 = sample(sys.f0, half)
    p = sys.params
    y = kernels.rk4_first_model(p.omega, p.gamma, float(init.q_init), float(init.qdot_init),
                                np.ascontiguousarray(q01), np.ascontiguousarray(f0), grid.dt, grid.n)
    return Trajectory(grid=grid, q=y[:, 0], big_q=q01[::2] + y[:, 2], qdot=y[:, 1])


def _richardson_check(run, sys, init, grid, traj, tol):
    coarse_grid = TimeGrid(grid.s, grid.s + 2 * grid.dt * ((grid.n - 1) // 2), 2 * grid.dt)
    coarse = run(sys, init, coarse_grid)
    m = coarse_grid.n
    err = max(np.max(np.abs(traj.q[:2 * m - 1:2] - coarse.q)),
              np.max(np.abs(traj.big_q[:2 * m - 1:2] - coarse.big_q))) / 15.0
    if err > tol:
        raise StepSizeError(f"estimated error {err:.3e} exceeds tol {tol:.3e} at dt={grid.dt}")


def integrate_first_model(sys: ReducedSystem, init: InitialData, grid: TimeGrid,
                          tol: Optional[float] = None) -> Trajectory:
    """RK4 on the insulated q equation with Q co-integrated from its first-order form.

    With ``tol`` the run is repeated at 2*dt and a Richardson estimate above
    ``tol`` raises StepSizeError.
    """
    if sys.kind != FIRST:
        raise ValueError("integrate_first_model needs a first_model system")
    _check_grid(sys, grid)
    traj = _first_model_run(sys, init, grid)
    if tol is not None and grid.n >= 5:
        _richardson_check(_first_model_run, sys, init, grid, traj, tol)
    return traj


def integrate_first_model_q_insulated(sys: ReducedSystem, init: InitialData, grid: TimeGrid,
                                      q01_dot: Optional[Callable] = None, rtol=1e-12, atol=1e-14):
    """Verification path: Q from the second-order insulated equation for Q - Q01.

    Uses an independent adaptive integrator. ``q01_dot`` defaults to a
    central difference of Q01.
    """
    _check_grid(sys, grid)
    p = sys.params
    g2, w2, v0 = 2.0 * p.gamma, p.omega ** 2, float(init.qdot_init)
    if sys.field_is_zero:
        q01_dot = q01_dot or (lambda t: 0.0)
    elif q01_dot is None:
        h = 1e-5
        q01_dot = lambda t: (float(sys.q01(t + h)) - float(sys.q01(t - h))) / (2 * h)
    f0 = sys.f0 or (lambda t: 0.0)
    q01_s = 0.0 if sys.field_is_zero else float(sys.q01(grid.s))

    def rhs(t, y):
        P, Pd, F = y
        return [Pd, -g2 * Pd - w2 * P + g2 * v0 - g2 * q01_dot(t) + g2 * F, f0(t)]

    y0 = [0.0, g2 * (float(init.q_init) - q01_s), 0.0]
    sol = solve_ivp(rhs, (grid.s, grid.times[-1]), y0, method="DOP853", t_eval=grid.times,
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise PointwaveError(f"verification integrator failed: {sol.message}")
    q01 = np.zeros(grid.n) if sys.field_is_zero else sample(sys.q01, grid.times)
    return q01 + sol.y[0]


def volterra_residual(sys: ReducedSystem, traj: Trajectory, method="trapezoid"):
    """Q + 2 gamma int Q - 2 gamma int q - Q01 on the trajectory grid."""
    g2 = 2.0 * sys.params.gamma
    ts = traj.times
    cum = cumulative_simpson if method == "simpson" else cumulative_trapezoid
    diff = traj.big_q - traj.q
    integral = cum(diff, x=ts, initial=0.0)
    q01 = np.zeros(len(ts)) if sys.field_is_zero else sample(sys.q01, ts)
    return traj.big_q + g2 * integral - q01


# ---------------------------------------------------------------------------
# Standard model
# ---------------------------------------------------------------------------

def _standard_model_run(sys, init, grid):
    half = grid.half_times
    phi01 = np.zeros(len(half)) if sys.field_is_zero else sample(sys.q01, half)
    f0 = sample(sys.f0, half)
    p = sys.params
    y = kernels.rk4_standard_model(p.omega, p.gamma1, p.gamma2, float(init.q_init),
                                   float(init.qdot_init), np.ascontiguousarray(phi01),
                                   np.ascontiguousarray(f0), grid.dt, grid.n)
    return Trajectory(grid=grid, q=y[:, 0], big_q=2.0 * p.gamma2 * y[:, 2] + phi01[::2], qdot=y[:, 1])


def standard_initial_relations(sys: ReducedSystem, traj: Trajectory):
    """Residuals at t = s of
    (d2/dt2 + omega^2) q0 = gamma1 phi01 + f0 and
    (d2/dt2 + omega^2)(Q_phi - phi01) = 2 gamma2 qdot0,
    with second derivatives from a one-sided 5-point stencil."""
    p = sys.params
    dt = traj.grid.dt
    w = np.array([35.0, -104.0, 114.0, -56.0, 11.0]) / (12.0 * dt * dt)
    ts = traj.times[:5]
    phi = np.zeros(5) if sys.field_is_zero else sample(sys.q01, ts)
    f0 = sample(sys.f0, ts)
    r1 = w @ traj.q[:5] + p.omega ** 2 * traj.q[0] - p.gamma1 * phi[0] - f0[0]
    psi = traj.big_q[:5] - phi
    r2 = w @ psi + p.omega ** 2 * psi[0] - 2.0 * p.gamma2 * traj.qdot[0]
    return float(r1), float(r2)


def integrate_standard_model(sys: ReducedSystem, init: InitialData, grid: TimeGrid,
                             tol: Optional[float] = None, relation_tol=1e-4) -> Trajectory:
    """RK4 on q0'' = -omega^2 q0 + 2 gamma1 gamma2 int q0 + gamma1 phi01 + f0.

    Q_phi = 2 gamma2 int q0 + phi01. The supplementary initial relations are
    checked on the first samples; a violation beyond ``relation_tol`` (scaled)
    means the forcing samples are inconsistent and raises.
    """
    if sys.kind != STANDARD:
        raise ValueError("integrate_standard_model needs a standard_model system")
    _check_grid(sys, grid)
    traj = _standard_model_run(sys, init, grid)
    if tol is not None and grid.n >= 5:
        _richardson_check(_standard_model_run, sys, init, grid, traj, tol)
    if grid.n >= 5:
        r1, r2 = standard_initial_relations(sys, traj)
        scale = 1.0 + abs(traj.q[0]) + abs(traj.qdot[0]) + np.max(np.abs(traj.big_q[:5]))
        if max(abs(r1), abs(r2)) > relation_tol * scale * max(1.0, (grid.dt / 1e-3) ** 3):
            raise PointwaveError(f"supplementary initial relations violated: residuals {r1:.3e}, {r2:.3e}")
    return traj


def third_order_residual(sys: ReducedSystem, traj: Trajectory, phi01_dot=None, f0_dot=None):
    """Interior residual of (d3/dt3 + omega^2 d/dt - 2 gamma1 gamma2) q0 = gamma1 phi01' + f0'.

    Derivatives of q0 by central differences; forcing derivatives default to
    zero (homogeneous check) unless given.
    """
    p = sys.params
    dt = traj.grid.dt
    q = traj.q
    d3 = (q[4:] - 2 * q[3:-1] + 2 * q[1:-3] - q[:-4]) / (2 * dt ** 3)
    d1 = (q[3:-1] - q[1:-3]) / (2 * dt)
    ts = traj.times[2:-2]
    rhs = np.zeros(len(ts))
    if phi01_dot is not None:
        rhs += p.gamma1 * sample(phi01_dot, ts)
    if f0_dot is not None:
        rhs += sample(f0_dot, ts)
    return d3 + p.omega ** 2 * d1 - 2 * p.gamma1 * p.gamma2 * q[2:-2] - rhs


# ---------------------------------------------------------------------------
# Field reconstruction
# ---------------------------------------------------------------------------

def reconstruct_field(sys: ReducedSystem, traj: Trajectory, t, x):
    """u(t, x) (phi(t, x) for the standard model) from the retarded formula.

    Q is linearly interpolated on the trajectory grid; outside the light cone
    of the coupling point the result is u01(t, x) exactly.
    """
    cfg = sys.cfg
    t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    r = np.abs(x - cfg.x0) / cfg.c
    forward = t - r
    backward = t + r
    ahead = (t >= cfg.s) & (forward >= cfg.s)
    behind = (t < cfg.s) & (backward <= cfg.s)
    emit = np.where(ahead, forward, np.where(behind, backward, np.nan))
    sign = np.where(ahead, 1.0, -1.0)
    active = ahead | behind

    out = np.zeros(t.shape) if sys.field_is_zero else np.asarray(sys.u01(t, x), dtype=float) + np.zeros(t.shape)
    if np.any(active):
        te = emit[active]
        ts = traj.times
        slack = 1e-9 * traj.grid.dt
        if np.any(te < ts[0] - slack) or np.any(te > ts[-1] + slack):
            raise OutOfRangeError(
                f"emission times [{te.min():.6g}, {te.max():.6g}] outside trajectory [{ts[0]:.6g}, {ts[-1]:.6g}]")
        te = np.clip(te, ts[0], ts[-1])
        big_q = np.interp(te, ts, traj.big_q)
        q01 = 0.0 if sys.field_is_zero else sample(sys.q01, te)
        out[active] += sign[active] * (big_q - q01)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Characteristic roots
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityReport:
    kind: str
    roots: tuple
    coefficients: tuple
    classification: str
    growth_rate: float

    @property
    def positive_real_part_count(self) -> int:
        return sum(1 for r in self.roots if r.real > GROWTH_THRESHOLD)


def _polish(roots, coeffs, iters=3):
    a2, a1, a0 = coeffs
    out = []
    for lam in roots:
        for _ in range(iters):
            p = ((lam + a2) * lam + a1) * lam + a0
            dp = (3 * lam + 2 * a2) * lam + a1
            if dp == 0:
                break
            lam = lam - p / dp
        out.append(complex(lam))
    return out


def _classify(roots):
    top = max(r.real for r in roots)
    if top > GROWTH_THRESHOLD:
        return "growing", top
    if top >= -GROWTH_THRESHOLD:
        return "marginal", top
    return "decaying", top


def characteristic_roots(kind, params: OscillatorParams) -> StabilityReport:
    """Roots of lambda^3 + 2 gamma lambda^2 + omega^2 lambda (first model) or
    lambda^3 + omega^2 lambda - 2 gamma1 gamma2 (standard model), largest real part first."""
    if kind in ("first", FIRST):
        kind = FIRST
        g, w2 = params.gamma, params.omega ** 2
        disc = np.sqrt(complex(g * g - w2))
        roots = [0j, complex(-g + disc), complex(-g - disc)]
        coeffs = (2.0 * g, w2, 0.0)
    elif kind in ("standard", STANDARD):
        kind = STANDARD
        coeffs = (0.0, params.omega ** 2, -2.0 * params.gamma1 * params.gamma2)
        a2, a1, a0 = coeffs
        companion = np.array([[-a2, -a1, -a0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        roots = _polish(np.linalg.eigvals(companion).astype(complex), coeffs)
        # a real cubic has one real root or three; snap rounding-level imaginary parts
        roots = [complex(r.real, 0.0) if abs(r.imag) <= 1e-13 * (1 + abs(r)) else r for r in roots]
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    roots.sort(key=lambda r: (-r.real, -r.imag))
    classification, rate = _classify(roots)
    return StabilityReport(kind=kind, roots=tuple(roots), coefficients=coeffs,
                           classification=classification, growth_rate=float(rate))
