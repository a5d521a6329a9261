"""Rate fitting, stability classification and solver cross-validation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, FitError

# Rates within this band of zero (per unit time) classify as Neutral.
NEUTRAL_EPS = 1e-3

DECAYING = "Decaying"
GROWING = "Growing"
NEUTRAL = "Neutral"

# Energies below this are treated as exact zeros when fitting.
_ZERO_FLOOR = 1e-300


@dataclass(frozen=True)
class EnergyTrace:
    """Time series (t_n, E(t_n)) from either solver, with run metadata."""

    times: np.ndarray
    energies: np.ndarray
    meta: dict

    def __post_init__(self):
        if len(self.times) != len(self.energies):
            raise ConfigError("times and energies must have equal length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ConfigError("times must be strictly increasing")
        if np.any(self.energies < 0.0):
            raise ConfigError("energies must be non-negative")

    @property
    def span(self) -> float:
        return float(self.times[-1] - self.times[0])


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential fit E ~ A * exp(rate * t); rate < 0 decays."""

    rate: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    method: str
    classification: str


@dataclass(frozen=True)
class ComparisonReport:
    """Displacement and energy agreement between the two solvers."""

    times: np.ndarray
    l2_errors: np.ndarray
    max_l2_error: float
    max_energy_rel_gap: float
    meta: dict


def classify_rate(rate: float) -> str:
    if rate < -NEUTRAL_EPS:
        return DECAYING
    if rate > NEUTRAL_EPS:
        return GROWING
    return NEUTRAL


def _strict_peaks(values: np.ndarray) -> np.ndarray:
    inner = values[1:-1]
    mask = (inner > values[:-2]) & (inner > values[2:])
    return np.nonzero(mask)[0] + 1


def fit_decay_rate(
    trace: EnergyTrace, t_a: float, t_b: float, method: str = "peaks"
) -> DecayFit:
    """Fit a line through (t, ln E) on the window [t_a, t_b].

    The "peaks" method fits only strict local maxima of E, tracking the
    envelope of an oscillating trace; "all-points" uses every positive sample.
    An all-zero window reports Decaying with a -inf rate sentinel.

    Raises:
        FitError: fewer than 10 samples in the window, or fewer than 4 strict
            maxima for the peaks method.
    """
    if method not in ("peaks", "all-points"):
        raise ConfigError(f"unknown fit method {method!r}")
    mask = (trace.times >= t_a - 1e-12) & (trace.times <= t_b + 1e-12)
    t = trace.times[mask]
    e = trace.energies[mask]
    if len(t) < 10:
        raise FitError(f"window [{t_a}, {t_b}] holds {len(t)} samples, need >= 10")
    if np.all(e < _ZERO_FLOOR):
        return DecayFit(
            rate=-math.inf,
            intercept=-math.inf,
            r_squared=1.0,
            window=(t_a, t_b),
            method=method,
            classification=DECAYING,
        )
    if method == "peaks":
        idx = _strict_peaks(e)
        if len(idx) < 4:
            raise FitError(f"peaks method needs >= 4 strict maxima, found {len(idx)}")
        t = t[idx]
        e = e[idx]
    keep = e > _ZERO_FLOOR
    t = t[keep]
    e = e[keep]
    if len(t) < 2:
        return DecayFit(
            rate=-math.inf,
            intercept=-math.inf,
            r_squared=1.0,
            window=(t_a, t_b),
            method=method,
            classification=DECAYING,
        )
    log_e = np.log(e)
    slope, intercept = np.polyfit(t, log_e, 1)
    resid = log_e - (slope * t + intercept)
    ss_res = float(np.dot(resid, resid))
    centered = log_e - np.mean(log_e)
    ss_tot = float(np.dot(centered, centered))
    r_squared = 1.0 if ss_tot < 1e-30 else max(0.0, 1.0 - ss_res / ss_tot)
    return DecayFit(
        rate=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
        window=(t_a, t_b),
        method=method,
        classification=classify_rate(float(slope)),
    )


def fit_with_fallback(trace: EnergyTrace, t_a: float, t_b: float) -> DecayFit:
    """Peaks fit, falling back to all-points for monotone (peak-free) traces."""
    try:
        return fit_decay_rate(trace, t_a, t_b, method="peaks")
    except FitError:
        return fit_decay_rate(trace, t_a, t_b, method="all-points")


def classify_stability(trace: EnergyTrace) -> str:
    """Stability verdict from a fit over the last 75% of the trace.

    Raises:
        FitError: when the trace spans less than 20*ell of simulated time.
    """
    ell = float(trace.meta.get("config", {}).get("ell", 1.0))
    if trace.span < 20.0 * ell:
        raise FitError(
            f"classification needs a span of at least 20*ell={20 * ell:.6g}, "
            f"trace spans {trace.span:.6g}"
        )
    t0 = float(trace.times[0])
    t1 = float(trace.times[-1])
    t_a = t0 + 0.25 * (t1 - t0)
    return fit_with_fallback(trace, t_a, t1).classification


def compare_solvers(config, sample_times) -> ComparisonReport:
    """Max L2-in-x displacement error and energy gap between the two solvers.

    The exact solution is evaluated at the finite-difference nodes and step
    times; L2 errors use trapezoid weights in x.
    """
    from . import fdtd
    from .characteristics import eval_field, energy_exact
    from .runners import build_trace

    cfg = config.resolved()
    sample_times = tuple(float(t) for t in sample_times)
    if any(t < 0.0 or t > cfg.t_final for t in sample_times):
        raise ConfigError("sample_times must lie within [0, t_final]")
    trace = build_trace(cfg)
    energy_fdtd, snaps = fdtd.run(cfg, snapshot_times=sample_times)

    times = []
    errors = []
    for snap in snaps:
        y = eval_field(trace, snap.x, snap.time)[0]
        diff = snap.u - y
        sq = diff * diff
        l2 = math.sqrt(
            float(np.trapz(sq, dx=cfg.ell / cfg.J))
        )
        times.append(snap.time)
        errors.append(l2)

    gaps = []
    for t, e_f in zip(energy_fdtd.times, energy_fdtd.energies):
        e_c = energy_exact(trace, float(t))
        gaps.append(abs(e_f - e_c) / max(e_c, 1e-30))
    return ComparisonReport(
        times=np.array(times),
        l2_errors=np.array(errors),
        max_l2_error=float(np.max(errors)) if errors else 0.0,
        max_energy_rel_gap=float(np.max(gaps)) if gaps else 0.0,
        meta={"config": cfg.as_dict()},
    )


def convergence_order(errors, grid_factors) -> float:
    """Least-squares slope of ln(error) against ln(h).

    Raises:
        ConfigError: fewer than 3 pairs, non-positive entries, or a
            degenerate (constant) grid.
    """
    e = np.asarray(errors, dtype=float)
    g = np.asarray(grid_factors, dtype=float)
    if len(e) != len(g) or len(e) < 3:
        raise ConfigError("need at least 3 matching error/step pairs")
    if np.any(e <= 0.0) or np.any(g <= 0.0):
        raise ConfigError("errors and grid factors must be strictly positive")
    lg = np.log(g)
    if float(np.max(lg) - np.min(lg)) < 1e-12:
        raise ConfigError("grid factors must not be all equal")
    slope, _ = np.polyfit(lg, np.log(e), 1)
    return float(slope)
