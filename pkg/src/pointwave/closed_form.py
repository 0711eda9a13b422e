"""Explicit solutions: damped propagator, homogeneous radiation damping,
harmonic steady states and the reflection asymptotics.

Times are measured from the start time ``s`` of the field configuration;
with the default FieldConfig (s = 0, x0 = 0, c = 1) the formulas reduce to
their textbook forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResonanceSingularityError
from .model_core import FieldConfig, OscillatorParams, TimeGrid, Trajectory, quad

RESONANCE_EPS = 1e-30


# ---------------------------------------------------------------------------
# Propagator of y'' + 2 gamma y' + omega^2 y = f
# ---------------------------------------------------------------------------

def _cos_sin(params: OscillatorParams, tau):
    """C(tau), S(tau) with S = sin(w tau)/w continued through w = 0 and w imaginary.

    ``tau`` is extended precision; the products w*tau lose no accuracy at
    long times that way (the oracle then rounds once, to float64).
    """
    ld = np.longdouble
    w2 = ld(params.omega) ** 2 - ld(params.gamma) ** 2
    if w2 > 0:
        w = np.sqrt(w2)
        return np.cos(w * tau), np.sin(w * tau) / w
    if w2 == 0:
        return np.ones_like(tau), tau.copy()
    kappa = np.sqrt(-w2)
    return np.cosh(kappa * tau), np.sinh(kappa * tau) / kappa


@dataclass(frozen=True)
class DampedPropagator:
    omega: float
    gamma: float

    @property
    def params(self) -> OscillatorParams:
        return OscillatorParams(omega=self.omega, gamma=self.gamma)

    @property
    def branch(self) -> str:
        return self.params.branch

    def matrix(self, t, s):
        """2x2 matrix (or stack of them, last two axes) mapping (y, y') at s to t."""
        v11, v12, v21, v22 = propagator_components(self.params, t, s)
        return np.stack([np.stack([v11, v12], -1), np.stack([v21, v22], -1)], -2)


def _components_ld(params, t, s):
    tau = np.asarray(t, dtype=np.longdouble) - np.longdouble(s)
    C, S = _cos_sin(params, tau)
    g = np.longdouble(params.gamma)
    e = np.exp(-g * tau)
    return e * (C + g * S), e * S, -np.longdouble(params.omega) ** 2 * e * S, e * (C - g * S)


def _to_float(v):
    return float(v) if np.ndim(v) == 0 else np.asarray(v, dtype=float)


def propagator_components(params: OscillatorParams, t, s):
    """(V11, V12, V21, V22) of the damped oscillator from time s to t."""
    return tuple(_to_float(v) for v in _components_ld(params, t, s))


def damped_response(params: OscillatorParams, y_init, ydot_init, f, t, s, chunk=10.0):
    """y(t) for y'' + 2 gamma y' + omega^2 y = f(t), y(s) = y_init, y'(s) = ydot_init.

    The convolution with V12 is integrated piecewise over sub-intervals of
    length ``chunk`` so long oscillatory histories stay within the quad limit.
    """
    v11, v12, _, _ = propagator_components(params, t, s)
    y = v11 * y_init + v12 * ydot_init
    if f is None or t == s:
        return y
    edges = np.linspace(s, t, max(1, math.ceil(abs(t - s) / chunk)) + 1)

    def integrand(tau):
        return propagator_components(params, t, tau)[1] * f(tau)

    return y + sum(quad(integrand, a, b) for a, b in zip(edges[:-1], edges[1:]))


# ---------------------------------------------------------------------------
# Homogeneous radiation damping (zero field data, no external force)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomogeneousSolution:
    """Analytic q, qdot, Q and u for an oscillator started in a field at rest."""
    params: OscillatorParams
    q_init: float
    qdot_init: float
    cfg: FieldConfig = FieldConfig()

    @property
    def q_limit(self) -> float:
        return 2.0 * self.params.gamma * self.qdot_init / self.params.omega ** 2

    def _limit_ld(self):
        ld = np.longdouble
        return 2 * ld(self.params.gamma) * ld(self.qdot_init) / ld(self.params.omega) ** 2

    def q(self, t):
        v11, v12, _, _ = _components_ld(self.params, t, self.cfg.s)
        a = self._limit_ld()
        return _to_float(v11 * (np.longdouble(self.q_init) - a) + v12 * np.longdouble(self.qdot_init) + a)

    def qdot(self, t):
        _, _, v21, v22 = _components_ld(self.params, t, self.cfg.s)
        a = self._limit_ld()
        return _to_float(v21 * (np.longdouble(self.q_init) - a) + v22 * np.longdouble(self.qdot_init))

    def big_q(self, t):
        # Q(s) = 0, Q'(s) = 2 gamma q(s), same forcing constant as q
        v11, v12, _, _ = _components_ld(self.params, t, self.cfg.s)
        a = self._limit_ld()
        return _to_float(-v11 * a + v12 * 2 * np.longdouble(self.params.gamma) * np.longdouble(self.q_init) + a)

    def u(self, t, x):
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        t_ret = t - np.abs(x - self.cfg.x0) / self.cfg.c
        inside = t_ret > self.cfg.s
        out = np.where(inside, self.big_q(np.where(inside, t_ret, self.cfg.s)), 0.0)
        return out[()] if out.ndim == 0 else out

    def trajectory(self, grid: TimeGrid) -> Trajectory:
        ts = grid.times
        return Trajectory(grid=grid, q=self.q(ts), big_q=self.big_q(ts), qdot=self.qdot(ts))


def homogeneous_solution(params: OscillatorParams, q_init, qdot_init, grid: TimeGrid,
                         cfg: FieldConfig | None = None):
    """Sampled (q, Q, qdot) on ``grid`` plus a callable u(t, x)."""
    cfg = cfg or FieldConfig(s=grid.s)
    if grid.s != cfg.s:
        raise ValueError(f"grid starts at {grid.s} but the field starts at s={cfg.s}")
    sol = HomogeneousSolution(params, float(q_init), float(qdot_init), cfg)
    return sol.trajectory(grid), sol.u


# ---------------------------------------------------------------------------
# Harmonic steady states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SteadyState:
    """Harmonic response a_s sin(k tau) + a_c cos(k tau) = amplitude sin(k tau + phi_k)."""
    a_s: float
    a_c: float
    amplitude: float
    phi_k: float
    k: float

    @classmethod
    def from_coefficients(cls, a_s, a_c, k):
        return cls(a_s=a_s, a_c=a_c, amplitude=math.hypot(a_s, a_c),
                   phi_k=math.atan2(a_c, a_s), k=k)

    def evaluate(self, tau):
        tau = np.asarray(tau, dtype=float)
        return self.a_s * np.sin(self.k * tau) + self.a_c * np.cos(self.k * tau)


def _denominator(params, k):
    return (params.omega ** 2 - k * k) ** 2 + (2.0 * params.gamma * k) ** 2


def particular_coefficients(params: OscillatorParams, k, a_sin, a_cos):
    """(a_s, a_c) with y = a_s sin(kt) + a_c cos(kt) solving
    y'' + 2 gamma y' + omega^2 y = a_sin sin(kt) + a_cos cos(kt)."""
    D = _denominator(params, k)
    if D < RESONANCE_EPS:
        raise ResonanceSingularityError(
            f"undamped drive at the natural frequency (k={k}, omega={params.omega})")
    d = params.omega ** 2 - k * k
    g = 2.0 * params.gamma * k
    return (d * a_sin + g * a_cos) / D, (d * a_cos - g * a_sin) / D


def steady_state(params: OscillatorParams, k, A):
    """Steady responses to the incident wave Q01 = A sin(k tau).

    Returns (response of q, response of Q - A sin(k tau)).
    """
    w2 = params.omega ** 2
    qs, qc = particular_coefficients(params, k, w2 * A, 0.0)
    # Q - Q01 is driven by -2 gamma dQ01/dt = -2 gamma A k cos(k tau)
    Qs, Qc = particular_coefficients(params, k, 0.0, -2.0 * params.gamma * A * k)
    return SteadyState.from_coefficients(qs, qc, k), SteadyState.from_coefficients(Qs, Qc, k)


def steady_amplitude(params: OscillatorParams, k, A=1.0):
    """omega^2 |A| / sqrt((omega^2 - k^2)^2 + (2 gamma k)^2), vectorized over k."""
    k = np.asarray(k, dtype=float)
    return params.omega ** 2 * abs(A) / np.sqrt((params.omega ** 2 - k * k) ** 2 + (2 * params.gamma * k) ** 2)


def peak_wavenumber(params: OscillatorParams) -> float:
    """Maximiser of the q amplitude over k; 0 when the response is monotone."""
    k2 = params.omega ** 2 - 2.0 * params.gamma ** 2
    return math.sqrt(k2) if k2 > 0 else 0.0


def reflection_profile(params: OscillatorParams, k, A, t, x, cfg: FieldConfig | None = None):
    """Long-time field for an incident wave tuned to k = omega.

    Zero behind the oscillator, a standing wave 2A sin(k xi/c) cos(k tau) in
    front of it, and the untouched incident wave outside the light cone.
    """
    cfg = cfg or FieldConfig()
    t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    tau = t - cfg.s
    xi = x - cfg.x0
    inside = tau - np.abs(xi) / cfg.c > 0
    standing = np.where(xi > 0, 2.0 * A * np.sin(k * xi / cfg.c) * np.cos(k * tau), 0.0)
    out = np.where(inside, standing, A * np.sin(k * (tau + xi / cfg.c)))
    return out[()] if out.ndim == 0 else out
