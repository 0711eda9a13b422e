"""Command-line front end.

Exit codes: 0 ok, 2 configuration error, 3 solver error, 4 comparison failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import closed_form, pde_direct, reduced_ode, volterra_kernel
from .errors import PointwaveError
from .model_core import FieldConfig, InitialData, OscillatorParams, TimeGrid, incident_sine, q01_series
from .scenario import ConfigError, Scenario, load_scenario

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_COMPARE = 0, 2, 3, 4
FMT = "%.17g"


# ---------------------------------------------------------------------------
# Solver dispatch
# ---------------------------------------------------------------------------

def _grid(sc: Scenario):
    return TimeGrid(sc.cfg.s, sc.get("grid.t_end"), sc.get("grid.dt"))


def _scheme(sc: Scenario):
    return pde_direct.GridScheme.make(sc.cfg.c, sc.get("grid.dx"), sc.get("grid.source_model"),
                                      sc.get("grid.courant"))


def _mollifier(sc: Scenario):
    kind = sc.get("kernel.mollifier")
    if kind == "dirac":
        return volterra_kernel.Mollifier.dirac()
    width = sc.get("kernel.width")
    if not width > 0:
        raise ConfigError("field 'kernel.width': must be > 0")
    return getattr(volterra_kernel.Mollifier, kind)(width)


def _reduced_system(sc: Scenario):
    kind = reduced_ode.STANDARD if sc.model == "standard" else reduced_ode.FIRST
    return reduced_ode.ReducedSystem.build(kind, sc.params, sc.cfg, sc.init, sc.forcing)


def run_solver(sc: Scenario, solver: str, frame_times=()):
    """Trajectory of one solver plus a field evaluator (t, xs) -> u, or None."""
    if solver == "reduced":
        if sc.model == "kernel":
            raise ConfigError("solver 'reduced' does not handle model 'kernel'")
        system = _reduced_system(sc)
        integrate = (reduced_ode.integrate_standard_model if sc.model == "standard"
                     else reduced_ode.integrate_first_model)
        traj = integrate(system, sc.init, _grid(sc))
        return traj, lambda t, xs: reduced_ode.reconstruct_field(system, traj, t, xs)
    if solver == "closed_form":
        if sc.model != "first":
            raise ConfigError("solver 'closed_form' needs model 'first'")
        if not (sc.init.field_is_zero and sc.forcing.is_zero):
            raise ConfigError("solver 'closed_form' needs zero field data and no forcing")
        sol = closed_form.HomogeneousSolution(sc.params, sc.init.q_init, sc.init.qdot_init, sc.cfg)
        return sol.trajectory(_grid(sc)), sol.u
    if solver == "pde":
        if sc.model == "kernel":
            raise ConfigError("solver 'pde' does not handle model 'kernel'")
        traj, frames = pde_direct.run_coupled(sc.cfg, sc.params, sc.init, sc.forcing, _scheme(sc),
                                              sc.get("grid.t_end"), model=sc.model,
                                              frame_times=list(frame_times) or None)
        return traj, lambda t, xs: pde_direct.probe(frames, t, xs)
    if solver == "kernel":
        if sc.model == "standard":
            raise ConfigError("solver 'kernel' needs model 'first' or 'kernel'")
        grid = _grid(sc)
        kernel = volterra_kernel.build_kernel(sc.cfg, _mollifier(sc))
        q01 = q01_series(sc.cfg, sc.init, sc.forcing, grid)
        traj = volterra_kernel.solve_q_nonlocal(sc.cfg, sc.params, kernel, q01, sc.forcing,
                                                sc.init, grid)
        return traj, None
    raise ConfigError(f"unknown solver {solver!r}")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def write_csv(path: Path, header, columns):
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, data, fmt=FMT, delimiter=",", header=",".join(header), comments="")


# ---------------------------------------------------------------------------
# Resonance scan
# ---------------------------------------------------------------------------

def fit_harmonic(ts, ys, k):
    """Least-squares y ~ a_s sin(k t) + a_c cos(k t) + const.

    Returns (amplitude, phase, relative rms residual).
    """
    basis = np.column_stack([np.sin(k * ts), np.cos(k * ts), np.ones_like(ts)])
    coef, *_ = np.linalg.lstsq(basis, ys, rcond=None)
    resid = ys - basis @ coef
    amp = math.hypot(coef[0], coef[1])
    rel = float(np.sqrt(np.mean(resid ** 2)) / amp) if amp > 0 else math.inf
    return amp, math.atan2(coef[1], coef[0]), rel


def steady_response(params: OscillatorParams, k, amplitude, settle, dt, cfg=None):
    """Run the first model under an incident sine and fit the final 20% of q."""
    cfg = cfg or FieldConfig()
    init = incident_sine(cfg, amplitude, k)
    system = reduced_ode.ReducedSystem.build(reduced_ode.FIRST, params, cfg, init)
    grid = TimeGrid(cfg.s, cfg.s + settle, dt)
    traj = reduced_ode.integrate_first_model(system, init, grid)
    start = int(0.8 * (grid.n - 1))
    tau = traj.times[start:] - cfg.s
    if k * (tau[-1] - tau[0]) < 2 * math.pi:
        return math.nan, math.nan, False
    amp, phase, rel = fit_harmonic(tau, traj.q[start:], k)
    return amp, phase, bool(rel < 1e-2)


def scan_resonance(params: OscillatorParams, ks, amplitude=1.0, settle=None, dt=0.02, threads=1):
    """(amplitudes, phases, ok flags) over the wavenumbers ``ks``."""
    if settle is None:
        settle = 15.0 / params.gamma if params.gamma > 0 else math.inf
    if not params.gamma * settle >= 10:
        raise ConfigError(f"settle time {settle} gives gamma*t = {params.gamma * settle:.3g} < 10")
    ks = np.asarray(ks, dtype=float)
    work = lambda k: steady_response(params, float(k), amplitude, settle, dt)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, ks))
    else:
        rows = [work(k) for k in ks]
    amps, phases, ok = (np.array(col) for col in zip(*rows))
    return amps, phases, ok.astype(bool)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _load(args):
    sc = load_scenario(args.scenario)
    return sc.with_overrides(**{"grid.dt": args.dt, "grid.dx": args.dx, "grid.t_end": args.t_end})


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args):
    sc = _load(args)
    out = _out_dir(args)
    solver = sc.solver
    frame_times = [float(t) for t in sc.get("output.frames")]
    if frame_times and solver == "kernel":
        raise ConfigError("field 'output.frames': field frames are not available for the kernel solver")
    traj, field = run_solver(sc, solver, frame_times)
    header, cols = ["t", "q", "Q"], [traj.times, traj.q, traj.big_q]
    if sc.get("output.qdot") and traj.qdot is not None:
        header.append("qdot")
        cols.append(traj.qdot)
    write_csv(out / "trajectory.csv", header, cols)
    reach = sc.cfg.c * (sc.get("grid.t_end") - sc.cfg.s)
    x_min = sc.get("output.x_min") if sc.get("output.x_min") is not None else sc.cfg.x0 - reach
    x_max = sc.get("output.x_max") if sc.get("output.x_max") is not None else sc.cfg.x0 + reach
    xs = np.linspace(x_min, x_max, sc.get("output.nx"))
    for t in frame_times:
        write_csv(out / f"field_t{t:.6g}.csv", ["x", "u"], [xs, field(t, xs)])
    print(f"{solver}: {traj.grid.n} samples -> {out / 'trajectory.csv'}")
    return EXIT_OK


def cmd_scan_resonance(args):
    if args.scenario:
        sc = load_scenario(args.scenario)
        params = sc.params
        k_min, k_max, k_step = sc.get("scan.k_min"), sc.get("scan.k_max"), sc.get("scan.k_step")
        amplitude, settle, dt = sc.get("scan.amplitude"), sc.get("scan.settle"), sc.get("scan.dt")
    else:
        if args.omega is None:
            raise ConfigError("either --scenario or --omega is required")
        params = OscillatorParams(args.omega, args.gamma)
        k_min, k_max, k_step, amplitude, settle, dt = 0.5, 1.5, 2.5e-3, 1.0, None, 0.02
    k_min = args.k_min if args.k_min is not None else k_min
    k_max = args.k_max if args.k_max is not None else k_max
    k_step = args.k_step if args.k_step is not None else k_step
    amplitude = args.amplitude if args.amplitude is not None else amplitude
    settle = args.settle if args.settle is not None else settle
    dt = args.dt if args.dt is not None else dt
    if not (k_step > 0 and k_max > k_min > 0):
        raise ConfigError("k range must satisfy 0 < k_min < k_max with k_step > 0")
    ks = k_min + k_step * np.arange(int(math.floor((k_max - k_min) / k_step + 1e-9)) + 1)
    amps, phases, ok = scan_resonance(params, ks, amplitude, settle, dt, args.threads)
    out = _out_dir(args)
    write_csv(out / "resonance_scan.csv", ["k", "amplitude", "phase", "fit_ok"],
              [ks, amps, phases, ok.astype(float)])
    good = np.where(ok, amps, -np.inf)
    best = int(np.argmax(good))
    print(f"k* = {ks[best]:.6g}  amplitude = {amps[best]:.6g}  "
          f"(predicted peak {closed_form.peak_wavenumber(params):.6g})")
    if not ok.all():
        print(f"{int((~ok).sum())} rows flagged: sine fit failed")
    return EXIT_OK


def _fmt_root(r):
    return f"{r.real:.12g}{r.imag:+.12g}i"


def cmd_roots(args):
    if args.scenario:
        sc = load_scenario(args.scenario)
        params, model = sc.params, ("standard" if sc.model == "standard" else "first")
    else:
        if args.omega is None:
            raise ConfigError("either --scenario or --omega is required")
        params = OscillatorParams(args.omega, args.gamma, args.gamma1, args.gamma2)
        model = args.model
    report = reduced_ode.characteristic_roots(model, params)
    for i, r in enumerate(report.roots, 1):
        print(f"lambda_{i} = {_fmt_root(r)}")
    print(f"classification: {report.classification} (max real part {report.growth_rate:.6g})")
    if args.out:
        out = _out_dir(args)
        write_csv(out / "roots.csv", ["real", "imag"],
                  [[r.real for r in report.roots], [r.imag for r in report.roots]])
    return EXIT_OK


def cmd_compare(args):
    sc = _load(args)
    solvers = list(sc.get("compare.solvers"))
    if len(solvers) < 2:
        raise ConfigError("field 'compare.solvers': need at least two solvers")
    default_tol = sc.get("compare.tol")
    pair_tol = sc.pair_tolerances
    results, errors = {}, {}
    for name in solvers:
        try:
            results[name] = run_solver(sc, name)[0]
        except (PointwaveError, ConfigError) as exc:
            errors[name] = str(exc)
    rows = []
    failed = False
    for i, a in enumerate(solvers):
        for b in solvers[i + 1:]:
            tol = pair_tol.get(f"{a}-{b}", pair_tol.get(f"{b}-{a}", default_tol))
            if a in errors or b in errors:
                msg = errors.get(a) or errors.get(b)
                print(f"{a} vs {b}: FAIL ({msg})")
                rows.append((a, b, math.nan, math.nan, tol, False))
                failed = True
                continue
            dq, dQ = _gaps(results[a], results[b])
            ok = bool(dq <= tol and dQ <= tol)
            failed |= not ok
            print(f"{a} vs {b}: max|dq| = {dq:.3e}  max|dQ| = {dQ:.3e}  tol {tol:.1e}  "
                  f"{'PASS' if ok else 'FAIL'}")
            rows.append((a, b, dq, dQ, tol, ok))
    if args.out:
        out = _out_dir(args)
        with open(out / "compare.csv", "w") as fh:
            fh.write("solver_a,solver_b,max_dq,max_dQ,tol,pass\n")
            for a, b, dq, dQ, tol, ok in rows:
                fh.write(f"{a},{b},{dq:.17g},{dQ:.17g},{tol:.17g},{int(ok)}\n")
    return EXIT_COMPARE if failed else EXIT_OK


def _gaps(a, b):
    """Sup-norm gaps on the coarser of the two time grids."""
    ref, other = (a, b) if a.grid.dt >= b.grid.dt else (b, a)
    ts = ref.times
    ts = ts[ts <= other.times[-1] + 1e-12]
    dq = np.max(np.abs(ref.q[:len(ts)] - np.interp(ts, other.times, other.q)))
    dQ = np.max(np.abs(ref.big_q[:len(ts)] - np.interp(ts, other.times, other.big_q)))
    return float(dq), float(dQ)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="pointwave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario_required=True):
        p.add_argument("--scenario", required=scenario_required, help="scenario file")
        p.add_argument("--out", default="." if scenario_required else None, help="output directory")
        p.add_argument("--dt", type=float, help="override grid.dt")
        p.add_argument("--dx", type=float, help="override grid.dx")
        p.add_argument("--t-end", type=float, dest="t_end", help="override grid.t_end")
        p.add_argument("--threads", type=int, default=1, help="worker threads for scans")

    p = sub.add_parser("simulate", help="integrate one scenario and write CSV")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan-resonance", help="steady amplitude of q over a range of k")
    common(p, scenario_required=False)
    p.set_defaults(out=".")
    p.add_argument("--omega", type=float)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--k-min", type=float, dest="k_min")
    p.add_argument("--k-max", type=float, dest="k_max")
    p.add_argument("--k-step", type=float, dest="k_step")
    p.add_argument("--amplitude", type=float)
    p.add_argument("--settle", type=float, help="run length per k (gamma*settle >= 10)")
    p.set_defaults(func=cmd_scan_resonance)

    p = sub.add_parser("roots", help="characteristic roots and stability")
    common(p, scenario_required=False)
    p.add_argument("--model", choices=["first", "standard"], default="first")
    p.add_argument("--omega", type=float)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--gamma1", type=float, default=0.0)
    p.add_argument("--gamma2", type=float, default=0.0)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("compare", help="pairwise sup-norm gaps between solvers")
    common(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PointwaveError, ValueError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
