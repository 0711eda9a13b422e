import math
from pathlib import Path

import numpy as np
import pytest

from pointwave.cli import fit_harmonic, main, scan_resonance, steady_response
from pointwave.closed_form import HomogeneousSolution
from pointwave.model_core import OscillatorParams
from pointwave.reduced_ode import STANDARD, characteristic_roots
from pointwave.scenario import ConfigError, load_scenario, parse_text

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def scenario(tmp_path, text, name="s.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    return header, np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))


def test_simulate_zero(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--scenario", str(SCENARIOS / "zero.toml"), "--out", str(out)]) == 0
    header, data = read_csv(out / "trajectory.csv")
    assert header == ["t", "q", "Q", "qdot"]
    assert data.shape == (501, 4)
    assert not data[:, 1:].any()


def test_simulate_homogeneous_spot_check(tmp_path):
    out = tmp_path / "out"
    rc = main(["simulate", "--scenario", str(SCENARIOS / "homogeneous.toml"), "--out", str(out),
               "--dt", "1e-2", "--t-end", "20"])
    assert rc == 0
    _, data = read_csv(out / "trajectory.csv")
    sol = HomogeneousSolution(OscillatorParams(1.0, 0.1), 1.0, 0.0)
    for row in data[::250]:
        assert row[1] == pytest.approx(float(sol.q(row[0])), abs=1e-9)
        assert row[2] == pytest.approx(float(sol.big_q(row[0])), abs=1e-9)


def test_simulate_standard_growth(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--scenario", str(SCENARIOS / "standard_growth.toml"), "--out", str(out)]) == 0
    _, data = read_csv(out / "trajectory.csv")
    t, q = data[:, 0], np.abs(data[:, 1])
    # envelope: running maximum over successive windows of one period
    edges = np.arange(10.0, 60.0, 2 * math.pi)
    env = [q[(t >= a) & (t < a + 2 * math.pi)].max() for a in edges[:-1]]
    assert np.all(np.diff(env) > 0)


def test_simulate_field_frames(tmp_path):
    text = (SCENARIOS / "homogeneous.toml").read_text() + 'output.frames = [5.0]\nsolver = "pde"\n'
    out = tmp_path / "out"
    rc = main(["simulate", "--scenario", scenario(tmp_path, text), "--out", str(out), "--dx", "0.05",
               "--t-end", "5"])
    assert rc == 0
    header, data = read_csv(out / "field_t5.csv")
    assert header == ["x", "u"]
    sol = HomogeneousSolution(OscillatorParams(1.0, 0.1), 1.0, 0.0)
    ref = np.array([float(sol.u(5.0, x)) for x in data[:, 0]])
    assert np.max(np.abs(data[:, 1] - ref)) < 1e-2


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["simulate", "--scenario", str(SCENARIOS / "pulse_kernel.toml"), "--t-end", "5"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()


def test_csv_has_seventeen_digits(tmp_path):
    out = tmp_path / "out"
    main(["simulate", "--scenario", str(SCENARIOS / "homogeneous.toml"), "--out", str(out), "--t-end", "1"])
    line = (out / "trajectory.csv").read_text().splitlines()[5]
    q = line.split(",")[1]
    assert float(q) == float(f"{float(q):.17g}") and len(q.replace("0.", "").lstrip("0")) >= 15


def test_fit_harmonic_exact():
    ts = np.linspace(0, 20, 1001)
    amp, phase, rel = fit_harmonic(ts, 2.0 * np.sin(1.3 * ts + 0.4) + 0.1, 1.3)
    assert amp == pytest.approx(2.0) and phase == pytest.approx(0.4) and rel < 1e-12


def test_steady_response_phase_at_natural_frequency():
    amp, phase, ok = steady_response(OscillatorParams(1.0, 0.1), 1.0, 1.0, 150.0, 0.02)
    assert ok
    assert phase == pytest.approx(-math.pi / 2, abs=2e-3)
    assert amp == pytest.approx(5.0, rel=1e-3)


def test_scan_peak_moves_to_omega_as_gamma_shrinks():
    ks = np.arange(0.9, 1.05, 0.005)
    peaks = []
    for gamma in (0.2, 0.1):
        amps, _, ok = scan_resonance(OscillatorParams(1.0, gamma), ks, settle=15 / gamma, threads=2)
        assert ok.all()
        peaks.append(ks[int(np.argmax(amps))])
    assert abs(peaks[1] - 1.0) < abs(peaks[0] - 1.0)


def test_scan_needs_settle_time():
    with pytest.raises(ConfigError):
        scan_resonance(OscillatorParams(1.0, 0.1), [1.0], settle=50.0)


def test_scan_cli(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["scan-resonance", "--omega", "1", "--gamma", "0.1", "--k-min", "0.95", "--k-max", "1.02",
               "--k-step", "0.01", "--settle", "120", "--out", str(out), "--threads", "2"])
    assert rc == 0
    header, data = read_csv(out / "resonance_scan.csv")
    assert header == ["k", "amplitude", "phase", "fit_ok"]
    assert data.shape == (8, 4) and data[:, 3].all()
    assert "k* = 0.99" in capsys.readouterr().out


def test_roots_cli(tmp_path, capsys):
    assert main(["roots", "--omega", "1", "--gamma", "0.1"]) == 0
    text = capsys.readouterr().out
    assert "lambda_1 = 0+0i" in text and "0.994987437107" in text and "marginal" in text
    out = tmp_path / "out"
    assert main(["roots", "--model", "standard", "--omega", "1", "--gamma1", "0.5", "--gamma2", "0.5",
                 "--out", str(out)]) == 0
    assert "growing" in capsys.readouterr().out
    _, data = read_csv(out / "roots.csv")
    lam = characteristic_roots(STANDARD, OscillatorParams(1.0, gamma1=0.5, gamma2=0.5)).roots[0]
    assert data[0, 0] == lam.real and data[0, 1] == 0.0
    assert main(["roots", "--model", "standard", "--omega", "1"]) == 0
    text = capsys.readouterr().out
    assert "+1i" in text and "-1i" in text and "marginal" in text


def test_roots_from_scenario(capsys):
    assert main(["roots", "--scenario", str(SCENARIOS / "standard_growth.toml")]) == 0
    assert "lambda_1 = 0.42385379907" in capsys.readouterr().out


def test_compare_zero_exact(tmp_path):
    out = tmp_path / "out"
    assert main(["compare", "--scenario", str(SCENARIOS / "zero.toml"), "--out", str(out)]) == 0
    lines = (out / "compare.csv").read_text().splitlines()
    assert lines[0] == "solver_a,solver_b,max_dq,max_dQ,tol,pass"
    for line in lines[1:]:
        _, _, dq, dQ, _, ok = line.split(",")
        assert float(dq) == 0.0 and float(dQ) == 0.0 and ok == "1"


def test_compare_coarse_pde_fails(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["compare", "--scenario", str(SCENARIOS / "coarse_pde.toml"), "--out", str(out), "--t-end", "20"])
    assert rc == 4
    rows = [line.split(",") for line in (out / "compare.csv").read_text().splitlines()[1:]]
    verdict = {(a, b): ok == "1" for a, b, *_, ok in rows}
    assert verdict[("closed_form", "reduced")]
    assert not verdict[("closed_form", "pde")] and not verdict[("reduced", "pde")]


def test_compare_reports_solver_failure(tmp_path, capsys):
    text = (SCENARIOS / "standard_growth.toml").read_text() + 'compare.solvers = ["reduced", "closed_form"]\n'
    rc = main(["compare", "--scenario", scenario(tmp_path, text)])
    assert rc == 4
    assert "FAIL" in capsys.readouterr().out


@pytest.mark.parametrize("text, needle", [
    ("params.omega = 1.0\ngrid.t_end = 1.0\nparams.mass = 2.0\n", "params.mass"),
    ("grid.t_end = 1.0\n", "params.omega"),
    ("params.omega = 1.0\ngrid.t_end = \n", "line 2"),
    ('params.omega = 1.0\ngrid.t_end = 1.0\ninit.profile = "square"\n', "init.profile"),
    ('params.omega = "fast"\ngrid.t_end = 1.0\n', "params.omega"),
])
def test_config_errors_exit_2(tmp_path, capsys, text, needle):
    rc = main(["simulate", "--scenario", scenario(tmp_path, text), "--out", str(tmp_path)])
    assert rc == 2
    assert needle in capsys.readouterr().err


def test_missing_scenario_file(tmp_path):
    assert main(["simulate", "--scenario", str(tmp_path / "nope.toml")]) == 2


def test_solver_error_exit_3(tmp_path, capsys):
    # domain edges inside the light cone
    text = ('params.omega = 1.0\nparams.gamma = 0.1\ninit.q = 1.0\nsolver = "pde"\n'
            'grid.t_end = 10.0\nfield.domain = [-2.0, 2.0]\ngrid.dx = 0.1\n')
    rc = main(["simulate", "--scenario", scenario(tmp_path, text), "--out", str(tmp_path)])
    assert rc == 3
    assert "solver error" in capsys.readouterr().err


def test_table_profile(tmp_path):
    xs = np.linspace(-10, 10, 401)
    np.savetxt(tmp_path / "pulse.csv", np.column_stack([xs, np.exp(-(xs - 3) ** 2)]), delimiter=",",
               header="x,u", comments="")
    text = ('params.omega = 1.0\nparams.gamma = 0.1\ninit.profile = "table"\ninit.table = "pulse.csv"\n'
            'grid.t_end = 5.0\ngrid.dt = 1e-2\n')
    sc = load_scenario(scenario(tmp_path, text))
    assert float(sc.init.u_init(3.0)) == pytest.approx(1.0, abs=1e-6)
    assert main(["simulate", "--scenario", scenario(tmp_path, text), "--out", str(tmp_path / "o")]) == 0


def test_pair_tolerance_keys():
    values = parse_text('params.omega = 1.0\ngrid.t_end = 1.0\ncompare.pair_tol.reduced-kernel = 0.5\n')
    assert values["compare.pair_tol.reduced-kernel"] == 0.5


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_scenarios_parse(path):
    sc = load_scenario(path)
    assert sc.params.omega > 0


_EXPECTED = {"coarse_pde": ("compare", 4), "homogeneous": ("compare", 0), "pulse_kernel": ("compare", 0),
             "zero": ("compare", 0), "resonance": ("scan-resonance", 0), "reflection": ("simulate", 0),
             "standard_growth": ("simulate", 0)}


@pytest.mark.slow
@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_scenarios_run(path, tmp_path):
    command, code = _EXPECTED[path.stem]
    assert main([command, "--scenario", str(path), "--out", str(tmp_path), "--threads", "4"]) == code
