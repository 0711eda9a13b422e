"""Shared domain types, grids and the free/forced d'Alembert field.

Everything here is a pure function of immutable inputs. Field profiles are
plain callables that must accept numpy arrays; grid-sampled profiles are
wrapped by :func:`tabulated` (cubic interpolation, zero outside the table).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import QuadratureError

QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-13
QUAD_LIMIT = 400

Profile = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OscillatorParams:
    """Oscillator frequency and coupling rates.

    ``gamma`` couples the first model; ``gamma1`` (force on the oscillator)
    and ``gamma2`` (source strength in the field) couple the standard model.
    Mass and elasticity are absorbed into ``omega`` and the rates.
    """
    omega: float
    gamma: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")

    @property
    def omega_gamma_sq(self) -> float:
        return self.omega ** 2 - self.gamma ** 2

    @property
    def omega_gamma(self) -> float:
        """sqrt(|omega^2 - gamma^2|); real frequency when underdamped, decay split otherwise."""
        return math.sqrt(abs(self.omega_gamma_sq))

    @property
    def branch(self) -> str:
        if self.gamma < self.omega:
            return "underdamped"
        if self.gamma == self.omega:
            return "critical"
        return "overdamped"


@dataclass(frozen=True)
class FieldConfig:
    c: float = 1.0
    x0: float = 0.0
    s: float = 0.0
    domain: tuple = (-math.inf, math.inf)

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"wave speed c must be > 0, got {self.c}")
        x_min, x_max = self.domain
        if not x_min < self.x0 < x_max:
            raise ValueError(f"coupling point x0={self.x0} must lie strictly inside {self.domain}")


@dataclass(frozen=True)
class InitialData:
    """Oscillator state and field profiles at the start time.

    ``u_init``/``udot_init`` of ``None`` mean identically zero. If
    ``udot_primitive`` (any x-antiderivative of ``udot_init``) is given the
    characteristic integral is evaluated from it instead of by quadrature.
    """
    q_init: float = 0.0
    qdot_init: float = 0.0
    u_init: Optional[Profile] = None
    udot_init: Optional[Profile] = None
    udot_primitive: Optional[Profile] = None

    @classmethod
    def at_rest(cls, q_init=0.0, qdot_init=0.0):
        return cls(q_init=q_init, qdot_init=qdot_init)

    @property
    def field_is_zero(self) -> bool:
        return self.u_init is None and self.udot_init is None


@dataclass(frozen=True)
class Forcing:
    """External forces: ``f0(t)`` on the oscillator, ``f1(t, x)`` on the field.

    When ``f1`` is given without ``f1_primitive`` an x-antiderivative based
    at x = 0 is built by quadrature.
    """
    f0: Optional[Callable[[float], float]] = None
    f1: Optional[Callable[[float, float], float]] = None
    f1_primitive: Optional[Callable[[float, float], float]] = None
    numeric_primitive: bool = field(default=False, init=False)

    def __post_init__(self):
        if self.f1 is not None and self.f1_primitive is None:
            object.__setattr__(self, "f1_primitive", _numeric_primitive(self.f1))
            object.__setattr__(self, "numeric_primitive", True)

    @property
    def is_zero(self) -> bool:
        return self.f0 is None and self.f1 is None


@dataclass(frozen=True)
class TimeGrid:
    s: float
    t_end: float
    dt: float
    n: int = field(init=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_end > self.s:
            raise ValueError(f"t_end={self.t_end} must exceed s={self.s}")
        # tolerate representation error in (t_end - s)/dt
        n = math.floor((self.t_end - self.s) / self.dt + 1e-9) + 1
        object.__setattr__(self, "n", n)

    @property
    def times(self) -> np.ndarray:
        return self.s + self.dt * np.arange(self.n)

    @property
    def half_times(self) -> np.ndarray:
        """Samples at every half step, length 2n - 1."""
        return self.s + 0.5 * self.dt * np.arange(2 * self.n - 1)


@dataclass(frozen=True)
class Trajectory:
    grid: TimeGrid
    q: np.ndarray
    big_q: np.ndarray
    qdot: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("q", "big_q", "qdot"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.asarray(arr, dtype=float)
            if arr.shape != (self.grid.n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({self.grid.n},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


@dataclass(frozen=True)
class FieldFrame:
    t: float
    xs: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if xs.ndim != 1 or np.any(np.diff(xs) <= 0):
            raise ValueError("frame xs must be strictly increasing")
        if u.shape != xs.shape:
            raise ValueError(f"frame u has shape {u.shape}, xs has {xs.shape}")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "u", u)


def heaviside(xi):
    """Unit step with the open convention 1_+(0) = 0."""
    return np.where(np.asarray(xi) > 0, 1.0, 0.0)


# ---------------------------------------------------------------------------
# Initial profiles
# ---------------------------------------------------------------------------

def gaussian_pulse(amplitude=1.0, width=1.0, center=0.0, q_init=0.0, qdot_init=0.0):
    """Field at rest shaped as amplitude * exp(-((x - center)/width)^2)."""
    def u(x):
        return amplitude * np.exp(-((np.asarray(x) - center) / width) ** 2)
    return InitialData(q_init=q_init, qdot_init=qdot_init, u_init=u)


def incident_sine(cfg: FieldConfig, amplitude=1.0, k=1.0, q_init=0.0, qdot_init=0.0):
    """Left-travelling wave A sin(k((x - x0)/c + t - s)).

    ``k`` is the angular frequency seen at the coupling point; the spatial
    wavenumber is k/c. With c = 1, x0 = s = 0 this is A sin(k(x + t)).
    """
    c, x0 = cfg.c, cfg.x0

    def u(x):
        return amplitude * np.sin(k * (np.asarray(x) - x0) / c)

    def udot(x):
        return amplitude * k * np.cos(k * (np.asarray(x) - x0) / c)

    def udot_prim(x):
        return amplitude * c * np.sin(k * (np.asarray(x) - x0) / c)

    return InitialData(q_init=q_init, qdot_init=qdot_init, u_init=u,
                       udot_init=udot, udot_primitive=udot_prim)


def tabulated(xs, u, udot=None, q_init=0.0, qdot_init=0.0):
    """Wrap sampled profiles by cubic interpolation, zero outside [xs[0], xs[-1]]."""
    xs = np.asarray(xs, dtype=float)
    lo, hi = xs[0], xs[-1]

    def wrap(spline):
        def f(x):
            x = np.asarray(x, dtype=float)
            return np.where((x >= lo) & (x <= hi), spline(np.clip(x, lo, hi)), 0.0)
        return f

    u_fn = wrap(CubicSpline(xs, np.asarray(u, dtype=float)))
    udot_fn = prim_fn = None
    if udot is not None:
        spline = CubicSpline(xs, np.asarray(udot, dtype=float))
        udot_fn = wrap(spline)
        anti = spline.antiderivative()

        def prim_fn(x):
            # zero extension of udot = constant extension of its primitive
            return anti(np.clip(np.asarray(x, dtype=float), lo, hi))

    return InitialData(q_init=q_init, qdot_init=qdot_init, u_init=u_fn,
                       udot_init=udot_fn, udot_primitive=prim_fn)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def quad(func, a, b, abs_tol=QUAD_ABS_TOL):
    """Adaptive Gauss-Kronrod integral of a scalar function; raises on failure."""
    if a == b:
        return 0.0
    res = integrate.quad(func, a, b, epsabs=abs_tol, epsrel=QUAD_REL_TOL,
                         limit=QUAD_LIMIT, full_output=1)
    if len(res) > 3:
        raise QuadratureError(f"quadrature failed ({res[3].splitlines()[0]})", (a, b))
    return res[0]


def _numeric_primitive(f1):
    def primitive(t, x):
        t_arr, x_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        out = np.empty(t_arr.shape)
        for idx in np.ndindex(t_arr.shape):
            ti = float(t_arr[idx])
            out[idx] = quad(lambda xi: f1(ti, xi), 0.0, float(x_arr[idx]))
        return out[()] if out.ndim == 0 else out
    return primitive


# ---------------------------------------------------------------------------
# Free and forced field
# ---------------------------------------------------------------------------

def free_field(cfg: FieldConfig, init: InitialData, t, x, abs_tol=QUAD_ABS_TOL):
    """d'Alembert evolution u0(t, s, x) of the initial profiles.

    Accepts scalars or broadcastable arrays. Backward times t < s work too.
    """
    t_arr, x_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    shift = cfg.c * (t_arr - cfg.s)
    xp, xm = x_arr + shift, x_arr - shift
    out = np.zeros(t_arr.shape)
    if init.u_init is not None:
        out += 0.5 * (np.asarray(init.u_init(xp), dtype=float) + np.asarray(init.u_init(xm), dtype=float))
    if init.udot_primitive is not None:
        out += (np.asarray(init.udot_primitive(xp), dtype=float)
                - np.asarray(init.udot_primitive(xm), dtype=float)) / (2 * cfg.c)
    elif init.udot_init is not None:
        udot = init.udot_init
        for idx in np.ndindex(out.shape):
            out[idx] += quad(lambda xi: float(udot(xi)), float(xm[idx]), float(xp[idx]), abs_tol) / (2 * cfg.c)
    return out[()] if out.ndim == 0 else out


def forced_field_contribution(cfg: FieldConfig, forcing: Forcing, t, x, abs_tol=QUAD_ABS_TOL):
    """Characteristic integral of f1: u01(t, s, x) - u0(t, s, x)."""
    t_arr, x_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    out = np.zeros(t_arr.shape)
    if forcing is None or forcing.f1 is None:
        return out[()] if out.ndim == 0 else out
    c, s = cfg.c, cfg.s
    for idx in np.ndindex(out.shape):
        ti, xi = float(t_arr[idx]), float(x_arr[idx])
        if forcing.numeric_primitive:
            # difference of a quadrature primitive = one quadrature over the cone slice
            def slice_integral(tau):
                r = c * (ti - tau)
                return quad(lambda xx: forcing.f1(tau, xx), xi - r, xi + r, abs_tol)
        else:
            def slice_integral(tau):
                r = c * (ti - tau)
                return float(forcing.f1_primitive(tau, xi + r)) - float(forcing.f1_primitive(tau, xi - r))
        out[idx] = quad(slice_integral, s, ti, abs_tol) / (2 * c)
    return out[()] if out.ndim == 0 else out


def u01_function(cfg: FieldConfig, init: InitialData, forcing: Optional[Forcing] = None):
    """Callable (t, x) -> u01(t, s, x): free field plus forced contribution."""
    forced = forcing is not None and forcing.f1 is not None

    def u01(t, x):
        val = free_field(cfg, init, t, x)
        if forced:
            val = val + forced_field_contribution(cfg, forcing, t, x)
        return val
    return u01


def q01_function(cfg: FieldConfig, init: InitialData, forcing: Optional[Forcing] = None):
    """Callable t -> Q01(t) = u01(t, s, x0)."""
    u01 = u01_function(cfg, init, forcing)
    return lambda t: u01(t, cfg.x0)


def q01_series(cfg: FieldConfig, init: InitialData, forcing: Optional[Forcing], grid: TimeGrid):
    """Q01 sampled on every grid time."""
    if grid.s != cfg.s:
        raise ValueError(f"grid starts at {grid.s} but the field starts at s={cfg.s}")
    if init.field_is_zero and (forcing is None or forcing.f1 is None):
        return np.zeros(grid.n)
    return np.asarray(q01_function(cfg, init, forcing)(grid.times), dtype=float)
