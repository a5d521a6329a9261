"""Command-line front end: simulate | sweep | spectrum | verify.

All outputs are plotter-agnostic CSV files plus a meta.json sidecar echoing
the resolved numeric parameters.  Floats are written with 17 significant
digits so identical configurations produce byte-identical files.  Exit codes:
0 success, 1 configuration error, 2 runtime or check failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import fdtd
from .analysis import classify_stability, compare_solvers, fit_with_fallback
from .characteristics import eval_field
from .config import SimConfig, resolve_initial
from .errors import ConfigError, DelayWaveError
from .runners import build_trace, run_characteristics, run_solver
from .spectral import is_stable, predicted_decay_rate, spectral_report

# Frozen regression bound for the delayed-feedback solver match at the
# default resolution (J=1000, lambda=0.9, mu=0.5, t in [0, 20]); measured at
# first implementation and kept as a verify gate.
DELAYED_MATCH_BOUND = 0.02
FREE_MATCH_BOUND = 5e-3

_CONFIG_FIELDS = (
    "ell",
    "mu",
    "boundary",
    "solver",
    "initial",
    "t_final",
    "J",
    "n_per_half",
    "courant",
    "sample_stride",
    "snapshot_times",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_meta(path: Path, meta: dict) -> None:
    path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _parse_mu_list(text: str) -> list[float]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise ConfigError("mu-list must name at least one value")
    try:
        return [float(part) for part in items]
    except ValueError as exc:
        raise ConfigError(f"mu-list: {exc}") from exc


def _parse_window(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"window must look like t_a:t_b, got {text!r}")
    try:
        t_a, t_b = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"window: {exc}") from exc
    if t_b <= t_a:
        raise ConfigError(f"window: need t_a < t_b, got {text!r}")
    return t_a, t_b


def _load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config: {path} must hold a JSON object")
    return data


def _make_config(args) -> SimConfig:
    """Precedence: flags override config-file values override defaults."""
    data: dict = {}
    if getattr(args, "config", None):
        file_data = _load_config_file(args.config)
        for key, value in file_data.items():
            if key in _CONFIG_FIELDS:
                data[key] = value
            elif key not in ("window", "mu_list", "out_dir"):
                raise ConfigError(f"config: unknown key {key!r}")
    flag_map = {
        "ell": "ell",
        "mu": "mu",
        "boundary": "boundary",
        "solver": "solver",
        "initial": "initial",
        "t_final": "t_final",
        "nodes": "J",
        "courant": "courant",
        "trace_n": "n_per_half",
        "sample_stride": "sample_stride",
    }
    for attr, field in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            data[field] = value
    if getattr(args, "snapshot_times", None):
        data["snapshot_times"] = tuple(float(t) for t in args.snapshot_times.split(","))
    if "snapshot_times" in data and not isinstance(data["snapshot_times"], tuple):
        data["snapshot_times"] = tuple(data["snapshot_times"])
    try:
        return SimConfig(**data).resolved()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _window_from_args(args, cfg: SimConfig) -> tuple[float, float]:
    if getattr(args, "window", None):
        return _parse_window(args.window)
    data = {}
    if getattr(args, "config", None):
        data = _load_config_file(args.config)
    if "window" in data:
        return _parse_window(str(data["window"]))
    return 10.0 * cfg.ell, float(cfg.t_final)


def cmd_simulate(args) -> int:
    cfg = _make_config(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta: dict = {"command": "simulate", "config": cfg.as_dict(), "outputs": []}

    snap_times = cfg.snapshot_times
    if cfg.solver == "both":
        energy_c, snaps = run_characteristics(cfg, snap_times)
        energy_f, _ = fdtd.run(cfg, snap_times)
        _write_csv(out / "energy_characteristics.csv", ["t", "E"],
                   [[t, e] for t, e in zip(energy_c.times, energy_c.energies)])
        _write_csv(out / "energy_fdtd.csv", ["t", "E"],
                   [[t, e] for t, e in zip(energy_f.times, energy_f.energies)])
        meta["outputs"] += ["energy_characteristics.csv", "energy_fdtd.csv"]
        meta["fdtd"] = {k: energy_f.meta[k] for k in ("dt", "delay_steps", "lambda_actual", "steps")}
        meta["characteristics"] = {k: energy_c.meta[k] for k in ("h_trace", "t_max")}
        compare_times = snap_times or tuple(
            cfg.t_final * f for f in (0.25, 0.5, 0.75)
        )
        report = compare_solvers(cfg, compare_times)
        meta["comparison"] = {
            "max_l2_error": report.max_l2_error,
            "max_energy_rel_gap": report.max_energy_rel_gap,
            "sample_times": list(report.times),
        }
    else:
        energy, snaps = run_solver(cfg, cfg.solver, snap_times)
        _write_csv(out / "energy.csv", ["t", "E"],
                   [[t, e] for t, e in zip(energy.times, energy.energies)])
        meta["outputs"].append("energy.csv")
        if cfg.solver == "fdtd":
            meta["fdtd"] = {k: energy.meta[k] for k in ("dt", "delay_steps", "lambda_actual", "steps")}
        else:
            meta["characteristics"] = {k: energy.meta[k] for k in ("h_trace", "t_max")}

    snap_rows = []
    for snap in snaps:
        for xi, ui in zip(snap.x, snap.u):
            snap_rows.append([snap.time, xi, ui])
    _write_csv(out / "snapshots.csv", ["t", "x", "y"], snap_rows)
    meta["outputs"].append("snapshots.csv")
    _write_meta(out / "meta.json", meta)
    return 0


def _sweep_point(cfg: SimConfig, mu: float, solver: str, window: tuple[float, float]) -> list:
    report = spectral_report(mu, cfg.ell)
    omega = report.predicted_omega if is_stable(mu) else None
    try:
        point_cfg = replace(cfg, mu=mu, solver=solver)
        energy, _ = run_solver(point_cfg, solver)
        fit = fit_with_fallback(energy, window[0], window[1])
        classification = classify_stability(energy)
        return [mu, report.rho, omega, fit.rate, fit.r_squared, classification, solver, ""]
    except Exception as exc:  # per-point failures stay in-row, run continues
        return [mu, report.rho, omega, None, None, "", solver, f"{type(exc).__name__}: {exc}"]


def _worker_count(n_points: int) -> int:
    cap = os.environ.get("DELAYWAVE_THREADS", "")
    limit = int(cap) if cap.strip().isdigit() and int(cap) > 0 else (os.cpu_count() or 1)
    return max(1, min(n_points, limit))


def cmd_sweep(args) -> int:
    cfg = _make_config(args)
    mu_values = None
    if getattr(args, "config", None):
        data = _load_config_file(args.config)
        if "mu_list" in data:
            mu_values = [float(v) for v in data["mu_list"]]
    if args.mu_list is not None:
        mu_values = _parse_mu_list(args.mu_list)
    if not mu_values:
        raise ConfigError("sweep requires a non-empty --mu-list")
    window = _window_from_args(args, cfg)
    solvers = ("characteristics", "fdtd") if cfg.solver == "both" else (cfg.solver,)

    tasks = [(mu, solver) for mu in mu_values for solver in solvers]
    with ThreadPoolExecutor(max_workers=_worker_count(len(tasks))) as pool:
        rows = list(pool.map(lambda ms: _sweep_point(cfg, ms[0], ms[1], window), tasks))

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "sweep.csv",
        ["mu", "rho_mu", "predicted_omega", "fitted_rate", "r_squared", "classification", "solver", "error"],
        rows,
    )
    _write_meta(out / "meta.json", {
        "command": "sweep",
        "config": cfg.as_dict(),
        "mu_list": mu_values,
        "window": list(window),
        "outputs": ["sweep.csv"],
    })
    return 0


def cmd_spectrum(args) -> int:
    if args.steps < 2 and not (args.steps == 1 and args.mu_min == args.mu_max):
        raise ConfigError("spectrum needs steps >= 2 (or a single-point range)")
    if args.mu_max < args.mu_min:
        raise ConfigError("spectrum: mu-max must be >= mu-min")
    grid = np.linspace(args.mu_min, args.mu_max, args.steps)
    rows = []
    for mu in grid:
        r = spectral_report(float(mu))
        rows.append([
            float(mu),
            r.eigenvalues[0].real, r.eigenvalues[0].imag,
            r.eigenvalues[1].real, r.eigenvalues[1].imag,
            r.rho, r.discriminant, r.simple, r.stable,
        ])
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "spectrum.csv",
        ["mu", "re1", "im1", "re2", "im2", "rho", "discriminant", "simple", "stable"],
        rows,
    )
    return 0


def _verify_fdtd_delayed(cfg: SimConfig, fault: str | None) -> float:
    """Max L2 displacement error of a delayed run against the exact solver."""
    t_final = 20.0 * cfg.ell
    run_cfg = replace(cfg, boundary="delayed", t_final=t_final, snapshot_times=())
    mode = fdtd.BoundaryMode.delayed_feedback(run_cfg.mu)
    init = resolve_initial(run_cfg)
    field = fdtd.init_field(init, run_cfg.ell, run_cfg.J, run_cfg.courant, mode)
    if fault == "delay-buffer":
        field.delay_buffer = np.zeros(max(1, field.delay_steps // 2))
    trace = build_trace(run_cfg)
    sample_times = [t_final * k / 10.0 for k in range(1, 11)]
    targets = {int(round(t / field.dt)) for t in sample_times}
    total = max(targets)
    worst = 0.0
    while field.step_index < total:
        fdtd.step(field)
        if field.step_index in targets:
            y = eval_field(trace, field.x, field.step_index * field.dt)[0]
            diff = field.u_curr - y
            l2 = math.sqrt(float(np.trapz(diff * diff, dx=field.h)))
            worst = max(worst, l2)
    return worst


def _verify_checks(cfg: SimConfig, fault: str | None) -> list[tuple[str, bool, str]]:
    from .characteristics import build_theta, extend_delay, extend_instant, extend_reflect, energy_exact
    from .config import sine_data

    checks: list[tuple[str, bool, str]] = []
    ell = cfg.ell
    n = cfg.n_per_half
    init = sine_data(ell)
    base = build_theta(init, ell, n)
    reflected = extend_reflect(base)
    mu = cfg.mu
    delayed = extend_delay(reflected, mu, 20.0 * ell + ell)
    s = delayed.samples

    k = np.arange(2 * n + 1, len(s))
    expected = (mu - 1.0) * s[k - n] - mu * s[k - 2 * n]
    ok = bool(np.array_equal(s[k], expected))
    checks.append(("trace-recursion-delayed", ok, "index-shift identity, zero tolerance"))

    inst = extend_instant(base, -0.5, 8.0 * ell)
    si = inst.samples
    ki = np.arange(n + 1, len(si))
    ratio = -(1.0 + (-0.5)) / (1.0 - (-0.5))
    ok = bool(np.array_equal(si[ki], ratio * si[ki - n]))
    checks.append(("trace-recursion-instant", ok, "index-shift identity, zero tolerance"))

    ok = True
    for t in (0.0, 0.7 * ell, 3.3 * ell, 17.0 * ell):
        y, _, _ = eval_field(delayed, 0.0, t)
        ok = ok and y == 0.0
    checks.append(("dirichlet-clamped-end", ok, "y(0,t) identically zero"))

    ok = True
    for j in range(1, n):
        t = j * delayed.h
        _, _, yx = eval_field(delayed, ell, t)
        ok = ok and yx == 0.0
    checks.append(("neumann-free-phase", ok, "y_x(ell,t)=0 on (0,2*ell), zero tolerance"))

    lhs = s[k] + s[k - n]
    rhs = mu * (s[k - n] - s[k - 2 * n])
    resid = np.max(np.abs(lhs - rhs)) if len(k) else 0.0
    scale = max(1.0, float(np.max(np.abs(s))))
    ok = bool(np.array_equal(s[k], expected)) and resid <= 5e-13 * scale
    checks.append(("delayed-boundary-law", ok, "flux law equals the recursion at nodes"))

    neutral = extend_delay(reflected, 0.0, 12.0 * ell)
    node_times = [neutral.h * j for j in (1, 50, 400, 2000)]
    node_times = [t for t in node_times if t + ell <= neutral.t_max]
    energies = [energy_exact(neutral, t) for t in node_times]
    ok = all(e == energies[0] for e in energies)
    checks.append(("energy-constant-mu0", ok, "bitwise equal at node-aligned times"))

    target = (math.pi ** 2 + 1.0) / 4.0
    e0 = energy_exact(base, 0.0)
    ok = abs(e0 - target) <= 1e-3
    checks.append(("initial-energy-sine", ok, f"|E(0)-(pi^2+1)/4| = {abs(e0 - target):.2e}"))

    free_cfg = replace(cfg, boundary="free", t_final=2.0 * ell, snapshot_times=())
    report = compare_solvers(free_cfg, [0.4 * ell, ell, 1.6 * ell, 2.0 * ell])
    ok = report.max_l2_error <= FREE_MATCH_BOUND
    checks.append(("fdtd-free-phase-match", ok, f"max L2 = {report.max_l2_error:.2e}"))

    worst = _verify_fdtd_delayed(cfg, fault)
    ok = worst <= DELAYED_MATCH_BOUND
    checks.append(("fdtd-delayed-match", ok, f"max L2 = {worst:.2e}"))

    mode = fdtd.BoundaryMode.delayed_feedback(cfg.mu)
    field = fdtd.init_field(resolve_initial(cfg), ell, cfg.J, cfg.courant, mode)
    free_field = fdtd.init_field(resolve_initial(cfg), ell, cfg.J, cfg.courant,
                                 fdtd.BoundaryMode.free_neumann())
    ok = True
    dirichlet_ok = True
    while field.step_index < field.delay_steps:
        fdtd.step(field)
        fdtd.step(free_field)
        ok = ok and bool(np.array_equal(field.u_curr, free_field.u_curr))
        dirichlet_ok = dirichlet_ok and field.u_curr[0] == 0.0
    checks.append(("fdtd-switch-consistency", ok, "delayed == free bit-for-bit before t=2*ell"))
    checks.append(("fdtd-dirichlet-node", dirichlet_ok, "clamped node exactly zero"))
    return checks


def cmd_verify(args) -> int:
    cfg = _make_config(args)
    fault = getattr(args, "inject_fault", None)
    checks = _verify_checks(cfg, fault)
    width = max(len(name) for name, _, _ in checks)
    failures = 0
    for name, ok, detail in checks:
        status = "PASS" if ok else "FAIL"
        print(f"{name.ljust(width)}  {status}  {detail}")
        if not ok:
            failures += 1
    print(f"{failures} of {len(checks)} checks failed" if failures else
          f"all {len(checks)} checks passed")
    return 2 if failures else 0


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ell", type=float, default=None, help="string length (default 1)")
    p.add_argument("--mu", type=float, default=None, help="feedback gain")
    p.add_argument("--boundary", default=None, help="free | instant | delayed")
    p.add_argument("--solver", default=None, help="characteristics | fdtd | both")
    p.add_argument("--initial", default=None, help="preset name or CSV table path")
    p.add_argument("--t-final", dest="t_final", type=float, default=None,
                   help="simulation horizon (default 40*ell)")
    p.add_argument("--nodes", type=int, default=None, help="spatial cells J (default 1000)")
    p.add_argument("--lambda", dest="courant", type=float, default=None,
                   help="Courant number dt/h (default 0.9)")
    p.add_argument("--trace-n", dest="trace_n", type=int, default=None,
                   help="trace samples per 2*ell (default 1000)")
    p.add_argument("--sample-stride", dest="sample_stride", type=int, default=None,
                   help="record energy every this many steps")
    p.add_argument("--snapshot-times", dest="snapshot_times", default=None,
                   help="comma-separated snapshot times")
    p.add_argument("--config", default=None, help="JSON config file (flags override it)")
    p.add_argument("--out-dir", default="out", help="output directory (default ./out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delaywave",
        description="Wave equation with delayed boundary velocity feedback: "
                    "simulation, sweeps, spectral stability analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one experiment, emit energy/snapshot CSV")
    _add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a list of feedback gains, emit sweep.csv")
    _add_config_flags(p)
    p.add_argument("--mu-list", dest="mu_list", default=None,
                   help="comma-separated feedback gains")
    p.add_argument("--window", default=None, help="fit window t_a:t_b (default 10*ell:t_final)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", help="tabulate eigenvalues and stability over a mu range")
    p.add_argument("--mu-min", dest="mu_min", type=float, required=True)
    p.add_argument("--mu-max", dest="mu_max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="run the invariant and cross-solver check suite")
    _add_config_flags(p)
    p.add_argument("--inject-fault", dest="inject_fault", default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except DelayWaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
