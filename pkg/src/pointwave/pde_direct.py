"""Grid oracle: leapfrog wave equation co-stepped with the oscillator.

The grid is centred on x0 so the coupling point is a node. Two realisations
of the point source:

* ``nearest_node``: delta as 1/dx at x0, oscillator by staggered Verlet.
  First order in dx for the coupling.
* ``characteristics_exact``: courant 1, where the three-point stencil is
  the exact d'Alembert update and the source enters as the jump of the
  retarded emission G(t) = Q - Q01 at x0. Oscillator and G advance together
  by the trapezoidal rule. Second order.

Edges are absorbing for the scattered part u - u01; the run also refuses
domains whose edges can talk to x0 before t_end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import BoundaryContaminationError, CourantError, OutOfRangeError
from .model_core import (FieldConfig, FieldFrame, Forcing, InitialData, OscillatorParams,
                         TimeGrid, Trajectory, free_field, u01_function)
from .reduced_ode import sample

NEAREST_NODE = "nearest_node"
CHARACTERISTICS_EXACT = "characteristics_exact"
DEFAULT_COURANT = {NEAREST_NODE: 0.5, CHARACTERISTICS_EXACT: 1.0}


@dataclass(frozen=True)
class GridScheme:
    dx: float
    dt: float
    courant: float
    source_model: str = NEAREST_NODE

    def __post_init__(self):
        if self.source_model not in DEFAULT_COURANT:
            raise ValueError(f"unknown source model {self.source_model!r}")
        if not (self.dx > 0 and self.dt > 0):
            raise ValueError("dx and dt must be positive")
        if self.courant > 1.0 + 1e-12:
            raise CourantError(f"courant {self.courant} > 1 is unstable")
        if self.source_model == CHARACTERISTICS_EXACT and abs(self.courant - 1.0) > 1e-12:
            raise CourantError(f"characteristics_exact needs courant 1, got {self.courant}")

    @classmethod
    def make(cls, c, dx, source_model=NEAREST_NODE, courant=None):
        courant = DEFAULT_COURANT[source_model] if courant is None else courant
        return cls(dx=dx, dt=courant * dx / c, courant=courant, source_model=source_model)


def _vectorized_f1(f1, t, xs):
    try:
        vals = np.asarray(f1(t, xs), dtype=float)
        if vals.shape == xs.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([float(f1(t, float(x))) for x in xs])


def _node_grid(cfg: FieldConfig, dx, t_end):
    """Nodes x0 + j dx covering the domain; checks edge causality."""
    reach = cfg.c * (t_end - cfg.s)
    x_min, x_max = cfg.domain
    if not (math.isfinite(x_min) and math.isfinite(x_max)):
        # whole line: pad the light cone by a few cells
        half = math.ceil(reach / dx) + 3
        left = right = half
    else:
        left = math.floor((cfg.x0 - x_min) / dx + 1e-9)
        right = math.floor((x_max - cfg.x0) / dx + 1e-9)
    if min(left, right) * dx <= reach:
        raise BoundaryContaminationError(
            f"domain edge within c*(t_end - s) = {reach:.6g} of x0 (edges at "
            f"{cfg.x0 - left * dx:.6g}, {cfg.x0 + right * dx:.6g})")
    xs = cfg.x0 + dx * np.arange(-left, right + 1)
    return xs, left


def run_coupled(cfg: FieldConfig, params: OscillatorParams, init: InitialData,
                forcing: Optional[Forcing], scheme: GridScheme, t_end, model="first",
                frame_every: Optional[int] = None, frame_times=None, f1_chunk=64):
    """Integrate the coupled system on the grid.

    Returns (Trajectory, list of FieldFrame). Frames are stored every
    ``frame_every`` steps and/or at the steps nearest to ``frame_times``;
    the first and last steps are always stored.
    """
    forcing = forcing or Forcing()
    if model not in ("first", "standard"):
        raise ValueError(f"model must be 'first' or 'standard', got {model!r}")
    grid = TimeGrid(cfg.s, t_end, scheme.dt)
    n = grid.n
    t_last = grid.times[-1]
    xs, j0 = _node_grid(cfg, scheme.dx, t_last)
    dt, dx, c = scheme.dt, scheme.dx, cfg.c
    exact = scheme.source_model == CHARACTERISTICS_EXACT
    times = grid.times

    if model == "first":
        g = params.gamma
        kq, kQ, mu = 2.0 * g, -2.0 * g, params.omega ** 2
    else:
        kq, kQ, mu = 2.0 * params.gamma2, 0.0, params.gamma1
    w2 = params.omega ** 2

    f0 = np.ascontiguousarray(sample(forcing.f0, times))
    has_f1 = forcing.f1 is not None
    u01 = u01_function(cfg, init, forcing)

    # free-plus-forced field at the two outermost nodes on each side, all steps
    edge_x = xs[[0, 1, -2, -1]]
    if init.field_is_zero and not has_f1:
        edge_free = np.zeros((n, 4))
    else:
        tt, xx = np.meshgrid(times, edge_x, indexing="ij")
        edge_free = np.ascontiguousarray(u01(tt, xx), dtype=float)

    u0 = np.asarray(free_field(cfg, init, cfg.s, xs), dtype=float) + np.zeros(len(xs))
    u1 = np.asarray(free_field(cfg, init, times[1], xs), dtype=float) + np.zeros(len(xs))
    if has_f1:
        u1 += 0.5 * dt * dt * _vectorized_f1(forcing.f1, cfg.s, xs)

    q_out = np.zeros(n)
    Q_out = np.zeros(n)
    qdot_out = np.zeros(n)
    q0, v0 = float(init.q_init), float(init.qdot_init)
    Q0 = u0[j0]
    q_out[0], Q_out[0], qdot_out[0] = q0, Q0, v0

    # first step, shared by both backends
    a = 0.5 * dt
    if exact:
        W = u1[j0]
        gn = kq * q0 + kQ * Q0
        den = 1.0 - a * kQ
        B = a * gn + a * kQ * W
        Qp = W + B / den
        beta = a * kq / den
        P0 = v0 + a * (-w2 * q0 + mu * Q0 + f0[0]) + a * f0[1] + a * mu * Qp
        lam = mu * beta - w2
        q1 = (q0 + a * v0 + a * P0) / (1.0 - a * a * lam)
        p1 = P0 + a * lam * q1
        G1 = (B + a * kq * q1) / den
        u1[j0] = W + G1
        osc = np.array([q1, p1, G1, 0.0])
        qdot1 = p1
    else:
        u1[j0] += 0.5 * dt * dt * (2.0 * c / dx) * (kq * q0 + kQ * Q0)
        p_half = v0 + a * (-w2 * q0 + mu * Q0 + f0[0])
        q1 = q0 + dt * p_half
        p_next = p_half + dt * (-w2 * q1 + mu * u1[j0] + f0[1])
        osc = np.array([q1, p_next, 0.0, 0.0])
        qdot1 = 0.5 * (p_half + p_next)
    q_out[1], Q_out[1], qdot_out[1] = q1, u1[j0], qdot1

    store = {0, 1, n - 1}
    if frame_every:
        store.update(range(0, n, frame_every))
    if frame_times is not None:
        for tf in np.atleast_1d(frame_times):
            k = int(round((tf - cfg.s) / dt))
            if not 0 <= k < n:
                raise OutOfRangeError(f"frame time {tf} outside [{cfg.s}, {t_last}]")
            store.add(k)
    stops = sorted(store)

    frames = [FieldFrame(times[0], xs, u0.copy()), FieldFrame(times[1], xs, u1.copy())]
    u_prev, u_cur = u0, u1
    code = kernels.CHARACTERISTICS_EXACT if exact else kernels.NEAREST_NODE
    empty_f1 = np.zeros((0, len(xs)))
    step = 1
    for stop in stops:
        while step < stop:
            end = min(stop, step + f1_chunk) if has_f1 else stop
            if has_f1:
                block = np.ascontiguousarray(
                    np.stack([_vectorized_f1(forcing.f1, times[k], xs) for k in range(step, end)]))
            else:
                block = empty_f1
            kernels.pde_advance(code, scheme.courant, dt, dx, c, j0, u_prev, u_cur, step, end,
                                osc, params.omega, kq, kQ, mu, f0, block, has_f1, edge_free,
                                q_out, Q_out, qdot_out)
            step = end
        if stop >= 2:
            frames.append(FieldFrame(times[stop], xs, u_cur.copy()))

    traj = Trajectory(grid=grid, q=q_out, big_q=Q_out, qdot=qdot_out)
    return traj, frames


def probe(frames, t, x):
    """Bilinear interpolation of stored frames in (t, x)."""
    ts = np.array([f.t for f in frames])
    order = np.argsort(ts)
    ts = ts[order]
    frames = [frames[i] for i in order]
    xs = frames[0].xs
    t = float(t)
    x = np.asarray(x, dtype=float)
    if t < ts[0] or t > ts[-1] or np.any(x < xs[0]) or np.any(x > xs[-1]):
        raise OutOfRangeError(f"({t}, x) outside stored range t in [{ts[0]}, {ts[-1]}], "
                              f"x in [{xs[0]}, {xs[-1]}]")
    i = int(np.searchsorted(ts, t, side="right")) - 1
    if i >= len(ts) - 1 or ts[i] == t:
        out = np.interp(x, xs, frames[min(i, len(ts) - 1)].u)
    else:
        w = (t - ts[i]) / (ts[i + 1] - ts[i])
        out = (1 - w) * np.interp(x, xs, frames[i].u) + w * np.interp(x, xs, frames[i + 1].u)
    return out[()] if np.ndim(out) == 0 else out


def discrete_energy(frame_a: FieldFrame, frame_b: FieldFrame, c):
    """Leapfrog-conserved energy between consecutive frames (staggered in time)."""
    dt = frame_b.t - frame_a.t
    dx = frame_a.xs[1] - frame_a.xs[0]
    vel = (frame_b.u - frame_a.u) / dt
    grad = (np.diff(frame_b.u) * np.diff(frame_a.u)) / dx ** 2
    return 0.5 * dx * (np.sum(vel ** 2) + c * c * np.sum(grad))
