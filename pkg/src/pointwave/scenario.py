"""Scenario files: flat ``section.key = value`` lines (a TOML subset).

Example::

    model = "first"
    params.omega = 1.0
    params.gamma = 0.1
    init.q = 1.0
    grid.dt = 1e-3
    grid.t_end = 50.0
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model_core import (FieldConfig, Forcing, InitialData, OscillatorParams, gaussian_pulse,
                         incident_sine, tabulated)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MODELS = ("first", "standard", "kernel")
PROFILES = ("zero", "gaussian_pulse", "incident_sine", "table")
F0_KINDS = ("zero", "constant", "sine")
F1_KINDS = ("zero", "uniform_sine")
SOLVERS = ("reduced", "closed_form", "pde", "kernel")
MOLLIFIERS = ("dirac", "gaussian", "bump")
SOURCE_MODELS = ("nearest_node", "characteristics_exact")

# key -> (type, default)
_SCHEMA = {
    "model": (str, "first"),
    "solver": (str, None),
    "params.omega": (float, None),
    "params.gamma": (float, 0.0),
    "params.gamma1": (float, 0.0),
    "params.gamma2": (float, 0.0),
    "field.c": (float, 1.0),
    "field.x0": (float, 0.0),
    "field.s": (float, 0.0),
    "field.domain": (list, None),
    "init.q": (float, 0.0),
    "init.qdot": (float, 0.0),
    "init.profile": (str, "zero"),
    "init.amplitude": (float, 1.0),
    "init.width": (float, 1.0),
    "init.center": (float, 0.0),
    "init.k": (float, 1.0),
    "init.table": (str, None),
    "forcing.f0": (str, "zero"),
    "forcing.f0_amplitude": (float, 0.0),
    "forcing.f0_k": (float, 1.0),
    "forcing.f1": (str, "zero"),
    "forcing.f1_amplitude": (float, 0.0),
    "forcing.f1_k": (float, 1.0),
    "grid.dt": (float, 1e-3),
    "grid.t_end": (float, None),
    "grid.dx": (float, 1e-2),
    "grid.source_model": (str, "characteristics_exact"),
    "grid.courant": (float, None),
    "kernel.mollifier": (str, "dirac"),
    "kernel.width": (float, 0.1),
    "output.qdot": (bool, True),
    "output.frames": (list, []),
    "output.x_min": (float, None),
    "output.x_max": (float, None),
    "output.nx": (int, 201),
    "scan.k_min": (float, 0.5),
    "scan.k_max": (float, 1.5),
    "scan.k_step": (float, 2.5e-3),
    "scan.amplitude": (float, 1.0),
    "scan.settle": (float, None),
    "scan.dt": (float, 0.02),
    "compare.solvers": (list, ["closed_form", "reduced"]),
    "compare.tol": (float, 1e-3),
}


class ConfigError(Exception):
    """Invalid scenario; the message names the offending line or field."""


@dataclass(frozen=True)
class Scenario:
    model: str
    params: OscillatorParams
    cfg: FieldConfig
    init: InitialData
    forcing: Forcing
    values: dict = field(repr=False)
    source: str = "<memory>"

    def get(self, key):
        return self.values[key]

    @property
    def solver(self) -> str:
        if self.values["solver"]:
            return self.values["solver"]
        return "kernel" if self.model == "kernel" else "reduced"

    @property
    def pair_tolerances(self) -> dict:
        return {k[len("compare.pair_tol."):]: v for k, v in self.values.items() if k.startswith("compare.pair_tol.")}

    def with_overrides(self, **overrides):
        values = dict(self.values)
        for key, val in overrides.items():
            if val is not None:
                values[key] = val
        return build_scenario(values, self.source)


def _flatten(table, prefix=""):
    out = {}
    for key, val in table.items():
        full = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(_flatten(val, full + "."))
        else:
            out[full] = val
    return out


def _coerce(key, val):
    typ = _SCHEMA[key][0] if key in _SCHEMA else float
    if typ is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"field '{key}': expected a number, got {val!r}")
        return float(val)
    if typ is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"field '{key}': expected an integer, got {val!r}")
        return val
    if not isinstance(val, typ):
        raise ConfigError(f"field '{key}': expected {typ.__name__}, got {val!r}")
    return val


def parse_text(text: str, source="<memory>") -> dict:
    try:
        table = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    raw = _flatten(table)
    values = {k: default for k, (_, default) in _SCHEMA.items()}
    for key, val in raw.items():
        if key not in _SCHEMA and not key.startswith("compare.pair_tol."):
            raise ConfigError(f"{source}: unknown field '{key}'")
        values[key] = _coerce(key, val)
    return values


def _choice(values, key, allowed):
    val = values[key]
    if val not in allowed:
        raise ConfigError(f"field '{key}': {val!r} is not one of {', '.join(allowed)}")
    return val


def _load_table(path, base: Path):
    p = Path(path)
    if not p.is_absolute():
        p = base / p
    try:
        data = np.genfromtxt(p, delimiter=",", names=True)
    except OSError as exc:
        raise ConfigError(f"field 'init.table': cannot read {p}: {exc}") from exc
    names = data.dtype.names or ()
    if "x" not in names or "u" not in names:
        raise ConfigError(f"field 'init.table': {p} needs columns x,u[,udot]")
    return data["x"], data["u"], (data["udot"] if "udot" in names else None)


def _build_init(values, cfg, base):
    q, qdot = values["init.q"], values["init.qdot"]
    profile = _choice(values, "init.profile", PROFILES)
    if profile == "zero":
        return InitialData.at_rest(q, qdot)
    if profile == "gaussian_pulse":
        if not values["init.width"] > 0:
            raise ConfigError("field 'init.width': must be > 0")
        return gaussian_pulse(values["init.amplitude"], values["init.width"], values["init.center"], q, qdot)
    if profile == "incident_sine":
        return incident_sine(cfg, values["init.amplitude"], values["init.k"], q, qdot)
    if values["init.table"] is None:
        raise ConfigError("field 'init.table': required when init.profile = \"table\"")
    xs, u, udot = _load_table(values["init.table"], base)
    return tabulated(xs, u, udot, q, qdot)


def _build_forcing(values):
    kind0 = _choice(values, "forcing.f0", F0_KINDS)
    kind1 = _choice(values, "forcing.f1", F1_KINDS)
    a0, k0 = values["forcing.f0_amplitude"], values["forcing.f0_k"]
    a1, k1 = values["forcing.f1_amplitude"], values["forcing.f1_k"]
    f0 = None
    if kind0 == "constant":
        f0 = lambda t: a0 + 0.0 * np.asarray(t, dtype=float)
    elif kind0 == "sine":
        f0 = lambda t: a0 * np.sin(k0 * np.asarray(t, dtype=float))
    if kind1 == "zero":
        return Forcing(f0=f0)
    # uniform in x: f1 = a1 sin(k1 t), primitive a1 sin(k1 t) x
    f1 = lambda t, x: a1 * np.sin(k1 * np.asarray(t, dtype=float)) + 0.0 * np.asarray(x, dtype=float)
    f1p = lambda t, x: a1 * np.sin(k1 * np.asarray(t, dtype=float)) * np.asarray(x, dtype=float)
    return Forcing(f0=f0, f1=f1, f1_primitive=f1p)


def build_scenario(values: dict, source="<memory>") -> Scenario:
    model = _choice(values, "model", MODELS)
    if values["solver"] is not None:
        _choice(values, "solver", SOLVERS)
    if values["params.omega"] is None:
        raise ConfigError("field 'params.omega': required")
    if values["grid.t_end"] is None:
        raise ConfigError("field 'grid.t_end': required")
    _choice(values, "grid.source_model", SOURCE_MODELS)
    _choice(values, "kernel.mollifier", MOLLIFIERS)
    for name in values["compare.solvers"]:
        if name not in SOLVERS:
            raise ConfigError(f"field 'compare.solvers': {name!r} is not one of {', '.join(SOLVERS)}")
    for key in ("grid.dt", "grid.dx", "grid.t_end"):
        if not values[key] > 0:
            raise ConfigError(f"field '{key}': must be > 0")
    try:
        params = OscillatorParams(values["params.omega"], values["params.gamma"],
                                  values["params.gamma1"], values["params.gamma2"])
    except ValueError as exc:
        raise ConfigError(f"field 'params': {exc}") from exc
    domain = values["field.domain"]
    if domain is None:
        domain = (-math.inf, math.inf)
    elif len(domain) != 2:
        raise ConfigError("field 'field.domain': expected [x_min, x_max]")
    try:
        cfg = FieldConfig(values["field.c"], values["field.x0"], values["field.s"],
                          (float(domain[0]), float(domain[1])))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"field 'field': {exc}") from exc
    if values["grid.t_end"] <= cfg.s:
        raise ConfigError("field 'grid.t_end': must exceed field.s")
    base = Path(source).parent if source != "<memory>" else Path.cwd()
    init = _build_init(values, cfg, base)
    forcing = _build_forcing(values)
    return Scenario(model=model, params=params, cfg=cfg, init=init, forcing=forcing,
                    values=values, source=source)


def load_scenario(path) -> Scenario:
    path = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return build_scenario(parse_text(text, path), path)
