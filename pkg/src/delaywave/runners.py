"""Shared run orchestration: configs in, energy traces and snapshots out."""

from __future__ import annotations

import numpy as np

from . import fdtd
from .analysis import EnergyTrace
from .characteristics import (
    ThetaTrace,
    build_theta,
    energy_exact,
    eval_field,
    extend_delay,
    extend_free,
    extend_instant,
    extend_reflect,
)
from .config import SimConfig, resolve_initial
from .errors import ConfigError


def build_trace(config: SimConfig) -> ThetaTrace:
    """Build the characteristic trace covering the configured horizon.

    The trace must reach t_final + ell so fields and energies are defined up
    to t_final.
    """
    cfg = config.resolved()
    init = resolve_initial(cfg)
    trace = build_theta(init, cfg.ell, cfg.n_per_half)
    horizon = cfg.t_final + cfg.ell
    if cfg.boundary == "free":
        return extend_free(trace, horizon)
    if cfg.boundary == "instant":
        return extend_instant(trace, cfg.mu, horizon)
    trace = extend_reflect(trace)
    if horizon > 3.0 * cfg.ell:
        trace = extend_delay(trace, cfg.mu, horizon)
    return trace


def characteristics_energy_trace(config: SimConfig, trace: ThetaTrace | None = None) -> EnergyTrace:
    """Energy time series from the exact solver at node-aligned sample times."""
    cfg = config.resolved()
    if trace is None:
        trace = build_trace(cfg)
    dt_sample = cfg.sample_stride * trace.h
    n_samples = int(np.floor(cfg.t_final / dt_sample + 1e-9))
    times = dt_sample * np.arange(n_samples + 1)
    energies = np.array([energy_exact(trace, float(t)) for t in times])
    meta = {
        "solver": "characteristics",
        "config": cfg.as_dict(),
        "h_trace": trace.h,
        "t_max": trace.t_max,
    }
    return EnergyTrace(times, energies, meta)


def run_characteristics(
    config: SimConfig, snapshot_times: tuple[float, ...] | None = None
) -> tuple[EnergyTrace, list[fdtd.FieldSnapshot]]:
    """Exact-solver counterpart of :func:`delaywave.fdtd.run`."""
    cfg = config.resolved()
    trace = build_trace(cfg)
    energy = characteristics_energy_trace(cfg, trace)
    wanted = snapshot_times if snapshot_times is not None else cfg.snapshot_times
    x = (cfg.ell / cfg.J) * np.arange(cfg.J + 1)
    snapshots = []
    for t in wanted:
        y = eval_field(trace, x, float(t))[0]
        snapshots.append(fdtd.FieldSnapshot(float(t), x.copy(), np.asarray(y)))
    return energy, snapshots


def run_solver(
    config: SimConfig, solver: str, snapshot_times: tuple[float, ...] | None = None
) -> tuple[EnergyTrace, list[fdtd.FieldSnapshot]]:
    if solver == "characteristics":
        return run_characteristics(config, snapshot_times)
    if solver == "fdtd":
        return fdtd.run(config, snapshot_times)
    raise ConfigError(f"solver must be 'characteristics' or 'fdtd', got {solver!r}")
