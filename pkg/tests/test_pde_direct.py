import math

import numpy as np
import pytest

from pointwave.closed_form import HomogeneousSolution
from pointwave.errors import BoundaryContaminationError, CourantError, OutOfRangeError
from pointwave.model_core import (FieldConfig, Forcing, InitialData, OscillatorParams, TimeGrid,
                                  free_field, gaussian_pulse, incident_sine)
from pointwave.pde_direct import (CHARACTERISTICS_EXACT, NEAREST_NODE, GridScheme,
                                  discrete_energy, probe, run_coupled)
from pointwave.reduced_ode import (FIRST, STANDARD, ReducedSystem, integrate_first_model,
                                   integrate_standard_model, reconstruct_field)

CFG = FieldConfig()
P = OscillatorParams(1.0, 0.1)


def exact(dx):
    return GridScheme.make(1.0, dx, CHARACTERISTICS_EXACT)


def test_scheme_validation():
    with pytest.raises(CourantError):
        GridScheme(dx=0.1, dt=0.2, courant=2.0)
    with pytest.raises(CourantError):
        GridScheme.make(1.0, 0.1, CHARACTERISTICS_EXACT, courant=0.5)
    with pytest.raises(ValueError):
        GridScheme(dx=0.1, dt=0.1, courant=1.0, source_model="spectral")
    s = GridScheme.make(2.0, 0.1)
    assert s.courant == 0.5 and s.dt == pytest.approx(0.025)


def test_boundary_contamination():
    cfg = FieldConfig(domain=(-5.0, 5.0))
    with pytest.raises(BoundaryContaminationError):
        run_coupled(cfg, P, InitialData.at_rest(1.0), None, exact(0.1), 10.0)
    tr, _ = run_coupled(cfg, P, InitialData.at_rest(1.0), None, exact(0.1), 4.0)
    assert len(tr.q) == 41


def test_model_name_validated():
    with pytest.raises(ValueError):
        run_coupled(CFG, P, InitialData.at_rest(1.0), None, exact(0.1), 1.0, model="third")


def test_uncoupled_free_field_second_order():
    params = OscillatorParams(1.0, 0.0)
    init = gaussian_pulse(1.0, 1.0, -1.0)
    errs = []
    for dx in (0.1, 0.05):
        scheme = GridScheme.make(1.0, dx, NEAREST_NODE)
        _, frames = run_coupled(CFG, params, init, None, scheme, 3.0)
        last = frames[-1]
        errs.append(np.max(np.abs(last.u - free_field(CFG, init, last.t, last.xs))))
    assert errs[1] < 1e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)


def test_exact_scheme_reproduces_free_field():
    params = OscillatorParams(1.0, 0.0)
    init = gaussian_pulse(1.0, 1.0, -1.0)
    _, frames = run_coupled(CFG, params, init, None, exact(0.05), 3.0)
    last = frames[-1]
    assert np.max(np.abs(last.u - free_field(CFG, init, last.t, last.xs))) < 1e-13


def test_energy_conserved_uncoupled():
    params = OscillatorParams(1.0, 0.0)
    init = gaussian_pulse(1.0, 0.5, 0.0)
    scheme = GridScheme.make(1.0, 0.05, NEAREST_NODE)
    _, frames = run_coupled(FieldConfig(domain=(-20.0, 20.0)), params, init, None, scheme, 5.0, frame_every=1)
    e = np.array([discrete_energy(a, b, 1.0) for a, b in zip(frames[:-1], frames[1:])])
    assert np.max(np.abs(e - e[0])) / e[0] < 1e-12


def test_matches_closed_form_both_schemes():
    init = InitialData.at_rest(1.0, 0.0)
    for scheme, tol in ((exact(0.02), 2e-4), (GridScheme.make(1.0, 0.02), 2e-3)):
        tr, _ = run_coupled(CFG, P, init, None, scheme, 20.0)
        sol = HomogeneousSolution(P, 1.0, 0.0)
        assert np.max(np.abs(tr.q - sol.q(tr.times))) < tol
        assert np.max(np.abs(tr.big_q - sol.big_q(tr.times))) < tol


def test_causality_exact_zero_outside_cone():
    init = InitialData.at_rest(1.0, 0.0)
    t_end = 10.0
    for scheme in (exact(0.05), GridScheme.make(1.0, 0.05, NEAREST_NODE, courant=1.0)):
        _, frames = run_coupled(CFG, P, init, None, scheme, t_end, frame_every=20)
        for f in frames:
            outside = np.abs(f.xs) > (f.t + scheme.dx + 1e-12)
            assert np.max(np.abs(f.u[outside]), initial=0.0) <= 1e-10


def test_probe():
    init = InitialData.at_rest(1.0, 0.0)
    _, frames = run_coupled(CFG, P, init, None, exact(0.05), 5.0, frame_every=10)
    f = frames[3]
    assert probe(frames, f.t, f.xs[7]) == f.u[7]
    mid = 0.5 * (frames[2].t + frames[3].t)
    x = f.xs[40]
    ex = 0.5 * (np.interp(x, f.xs, frames[2].u) + f.u[40])
    assert probe(frames, mid, x) == pytest.approx(ex)
    assert probe(frames, 1.0, np.array([0.0, 0.1])).shape == (2,)
    with pytest.raises(OutOfRangeError):
        probe(frames, 50.0, 0.0)
    with pytest.raises(OutOfRangeError):
        probe(frames, 1.0, 1e3)
    with pytest.raises(OutOfRangeError):
        run_coupled(CFG, P, init, None, exact(0.05), 5.0, frame_times=[7.0])


def test_reconstruct_agrees_with_probe():
    dx = 0.02
    for init in (InitialData.at_rest(1.0, 0.0), incident_sine(CFG, 0.5, 0.8, q_init=0.2)):
        sys = ReducedSystem.build(FIRST, P, CFG, init)
        tr = integrate_first_model(sys, init, TimeGrid(0.0, 8.0, dx))
        _, frames = run_coupled(CFG, P, init, None, exact(dx), 8.0, frame_times=[4.0, 8.0])
        xs = np.linspace(-6.0, 6.0, 25)
        for t in (4.0, 8.0):
            diff = reconstruct_field(sys, tr, t, xs) - probe(frames, t, xs)
            assert np.max(np.abs(diff)) < 5 * dx


def test_standard_model_on_grid():
    params = OscillatorParams(1.0, gamma1=0.3, gamma2=0.2)
    init = InitialData.at_rest(1.0, 0.0)
    sys = ReducedSystem.build(STANDARD, params, CFG, init)
    g = TimeGrid(0.0, 10.0, 0.01)
    ref = integrate_standard_model(sys, init, g)
    tr, _ = run_coupled(CFG, params, init, None, exact(0.01), 10.0, model="standard")
    assert np.max(np.abs(tr.q - ref.q)) < 1e-3
    assert np.max(np.abs(tr.big_q - ref.big_q)) < 1e-3


def test_f1_forcing_uncoupled():
    # spatially uniform f1 = cos t: u = 1 - cos t everywhere
    params = OscillatorParams(1.0, 0.0)
    forcing = Forcing(f1=lambda t, x: np.cos(t) + 0 * np.asarray(x), f1_primitive=lambda t, x: np.cos(t) * x)
    scheme = GridScheme.make(1.0, 0.05, NEAREST_NODE)
    tr, frames = run_coupled(CFG, params, InitialData(), forcing, scheme, 4.0)
    last = frames[-1]
    assert np.max(np.abs(last.u - (1 - math.cos(last.t)))) < 1e-3
    assert np.max(np.abs(tr.big_q - (1 - np.cos(tr.times)))) < 1e-3


def test_f1_forcing_coupled_matches_reduced():
    forcing = Forcing(f1=lambda t, x: 0.2 * np.sin(t) + 0 * np.asarray(x),
                      f1_primitive=lambda t, x: 0.2 * np.sin(t) * x)
    init = InitialData.at_rest(0.5, 0.0)
    sys = ReducedSystem.build(FIRST, P, CFG, init, forcing)
    ref = integrate_first_model(sys, init, TimeGrid(0.0, 6.0, 0.02))
    tr, _ = run_coupled(CFG, P, init, forcing, exact(0.02), 6.0)
    assert np.max(np.abs(tr.q - ref.q)) < 1e-3
    assert np.max(np.abs(tr.big_q - ref.big_q)) < 1e-3
