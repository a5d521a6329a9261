"""Experiment configuration and initial-data presets."""

from __future__ import annotations

from dataclasses import dataclass, replace, asdict
from pathlib import Path

import numpy as np

from .characteristics import InitialData
from .errors import ConfigError

BOUNDARIES = ("free", "instant", "delayed")
SOLVERS = ("characteristics", "fdtd", "both")


@dataclass(frozen=True)
class SimConfig:
    """Full description of one experiment.

    ``initial`` names a preset ("sine" is y0 = y1 = sin(pi x / ell); "zero")
    or points at a CSV file with columns x,y0,y1 sampled on [0, ell].
    ``courant`` is the requested CFL number dt/h (flag --lambda); the solver
    may adjust it slightly so the delay is an exact number of steps.
    """

    ell: float = 1.0
    mu: float = 0.5
    boundary: str = "delayed"
    solver: str = "characteristics"
    initial: str = "sine"
    t_final: float | None = None
    J: int = 1000
    n_per_half: int = 1000
    courant: float = 0.9
    sample_stride: int = 10
    snapshot_times: tuple[float, ...] = ()

    def resolved(self) -> "SimConfig":
        """Fill defaults (t_final = 40*ell) and validate all cross-field rules."""
        cfg = self
        if cfg.t_final is None:
            cfg = replace(cfg, t_final=40.0 * cfg.ell)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not (self.ell > 0.0):
            raise ConfigError(f"ell must be positive, got {self.ell}")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.t_final is not None and self.t_final <= 0.0:
            raise ConfigError(f"t-final must be positive, got {self.t_final}")
        if self.boundary == "delayed" and self.t_final is not None and self.t_final <= 2.0 * self.ell:
            raise ConfigError(
                f"t-final must exceed the delay 2*ell={2.0 * self.ell:.6g} for the "
                f"delayed boundary, got {self.t_final}"
            )
        if self.boundary == "instant" and self.mu == 1.0:
            raise ConfigError("mu: instant feedback is singular at mu = 1")
        if self.J < 8:
            raise ConfigError(f"nodes: need J >= 8, got {self.J}")
        if self.n_per_half < 2:
            raise ConfigError(f"trace-n: need n_per_half >= 2, got {self.n_per_half}")
        if not (0.0 < self.courant <= 1.0):
            raise ConfigError(f"lambda: CFL requires 0 < lambda <= 1, got {self.courant}")
        if self.sample_stride < 1:
            raise ConfigError(f"sample-stride must be >= 1, got {self.sample_stride}")
        if self.t_final is not None:
            for t in self.snapshot_times:
                if t < 0.0 or t > self.t_final:
                    raise ConfigError(f"snapshot time {t} outside [0, t_final]")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["snapshot_times"] = list(self.snapshot_times)
        return d


def sine_data(ell: float) -> InitialData:
    """The reference excitation y0 = y1 = sin(pi x / ell)."""
    w = np.pi / ell

    def y0(x):
        return np.sin(w * np.asarray(x, dtype=float))

    def y0_prime(x):
        return w * np.cos(w * np.asarray(x, dtype=float))

    def y1(x):
        return np.sin(w * np.asarray(x, dtype=float))

    return InitialData(y0=y0, y0_prime=y0_prime, y1=y1)


def zero_data() -> InitialData:
    def zero(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return InitialData(y0=zero, y0_prime=zero, y1=zero)


def load_tabulated(path: str | Path, ell: float) -> InitialData:
    """Initial data from a CSV file with header x,y0,y1 covering [0, ell].

    y0 and y1 are linearly interpolated; y0' comes from centered differences
    of the table.
    """
    try:
        raw = np.genfromtxt(path, delimiter=",", names=True)
    except OSError as exc:
        raise ConfigError(f"initial: cannot read table {path}: {exc}") from exc
    for col in ("x", "y0", "y1"):
        if raw.dtype.names is None or col not in raw.dtype.names:
            raise ConfigError(f"initial: table {path} must have columns x,y0,y1")
    xs = np.asarray(raw["x"], dtype=float)
    y0s = np.asarray(raw["y0"], dtype=float)
    y1s = np.asarray(raw["y1"], dtype=float)
    if len(xs) < 3 or np.any(np.diff(xs) <= 0):
        raise ConfigError("initial: table x column must be strictly increasing with >= 3 rows")
    if xs[0] > 1e-12 * ell or xs[-1] < ell * (1.0 - 1e-12):
        raise ConfigError(f"initial: table must cover [0, {ell}]")
    d0s = np.gradient(y0s, xs)

    def y0(x):
        return np.interp(np.asarray(x, dtype=float), xs, y0s)

    def y0_prime(x):
        return np.interp(np.asarray(x, dtype=float), xs, d0s)

    def y1(x):
        return np.interp(np.asarray(x, dtype=float), xs, y1s)

    return InitialData(y0=y0, y0_prime=y0_prime, y1=y1)


def resolve_initial(config: SimConfig) -> InitialData:
    """Map the config's ``initial`` field to callables."""
    name = config.initial
    if name == "sine":
        return sine_data(config.ell)
    if name == "zero":
        return zero_data()
    if Path(name).exists():
        return load_tabulated(name, config.ell)
    raise ConfigError(f"initial: unknown preset or missing file {name!r}")
