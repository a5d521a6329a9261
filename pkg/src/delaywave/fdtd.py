"""Explicit finite-difference solver for the delayed-feedback string.

Interior update is the standard leapfrog scheme on a uniform grid of J cells,

    u_i^{n+1} = 2 u_i^n - u_i^{n-1} + lam^2 (u_{i+1}^n - 2 u_i^n + u_{i-1}^n),

with lam = dt/h <= 1 (CFL at unit wave speed).  The clamped end keeps node 0
at zero.  The far end imposes the flux u_x(ell, t^n) = g^n through the ghost
node u_{J+1}^n = u_{J-1}^n + 2 h g^n:

    free            g^n = 0
    instant         g^n = mu * (u_J^{n+1} - u_J^n)/dt, the single implicit
                    term is solved in closed form (denominator 1 - 2 lam mu)
    delayed         g^n = mu * v(t^n - 2 ell) for t^n >= 2 ell, zero before;
                    the delayed velocity comes from a ring buffer of the last
                    M backward differences with dt * M = 2 ell exactly, so
                    the delayed argument is an exact index shift in time

The time step is always adjusted so that M = round(2 ell / dt) satisfies
dt * M = 2 ell exactly; the adjusted Courant number is reported on the field.

The recorded energy lives at half steps: with v = (u^{n+1} - u^n)/dt and the
slope of the level average w = (u^n + u^{n+1})/2 (centered differences inside,
one-sided second order at the ends),

    E^{n+1/2} = (h/2) * trapezoid(w_x^2 + v^2),

which tracks the conserved quadratic form of the leapfrog scheme.  The very
first record is taken at t = 0 from u^0 and the sampled initial velocity
(the centered-in-time derivative at t = 0), before the boundary kink of
incompatible data has formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .analysis import EnergyTrace
from .characteristics import InitialData, _call_on
from .config import SimConfig, resolve_initial
from .errors import ConfigError, SingularFeedbackError

_BOUNDARY_KINDS = ("free", "instant", "delayed")


@dataclass(frozen=True)
class BoundaryMode:
    """Far-end boundary law: free Neumann, instant feedback, or delayed feedback.

    Delayed feedback applies the free law for t < 2*ell and switches to the
    delayed velocity term afterwards.
    """

    kind: str
    mu: float | None = None

    def __post_init__(self):
        if self.kind not in _BOUNDARY_KINDS:
            raise ConfigError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "free":
            if self.mu is not None:
                raise ConfigError("free boundary takes no feedback gain")
        else:
            if self.mu is None:
                raise ConfigError(f"{self.kind} boundary requires a feedback gain mu")
            if self.kind == "instant" and self.mu == 1.0:
                raise SingularFeedbackError("instant feedback is singular at mu = 1")

    @classmethod
    def free_neumann(cls) -> "BoundaryMode":
        return cls("free")

    @classmethod
    def instant_feedback(cls, mu: float) -> "BoundaryMode":
        return cls("instant", mu)

    @classmethod
    def delayed_feedback(cls, mu: float) -> "BoundaryMode":
        return cls("delayed", mu)


@dataclass
class WaveField:
    """Mutable leapfrog state: two displacement levels plus the delay ring.

    ``u_prev``/``u_curr`` hold levels ``step_index - 1`` and ``step_index``.
    ``delay_buffer[n % M]`` holds the boundary backward-difference velocity
    pushed after step n, so reading the slot before overwriting it yields the
    velocity from exactly M steps (one delay interval) earlier.
    """

    ell: float
    J: int
    h: float
    dt: float
    courant: float
    requested_courant: float
    mode: BoundaryMode
    u_prev: np.ndarray
    u_curr: np.ndarray
    step_index: int
    delay_steps: int
    delay_buffer: np.ndarray
    initial_flux: float = 0.0
    x: np.ndarray = dataclass_field(default_factory=lambda: np.empty(0))
    v0: np.ndarray = dataclass_field(default_factory=lambda: np.empty(0))

    @property
    def time(self) -> float:
        """Time of the current level ``u_curr``."""
        return self.step_index * self.dt


@dataclass(frozen=True)
class FieldSnapshot:
    """Displacement profile captured at one step time."""

    time: float
    x: np.ndarray
    u: np.ndarray


def _adjust_time_step(ell: float, J: int, courant: float) -> tuple[float, float, int]:
    """Round dt so the delay 2*ell is an exact number of steps."""
    h = ell / J
    dt_requested = courant * h
    m = max(1, int(round(2.0 * ell / dt_requested)))
    dt = 2.0 * ell / m
    actual = dt / h
    if actual > 1.0 + 1e-12:
        m += 1
        dt = 2.0 * ell / m
        actual = dt / h
    return h, dt, m


def init_field(
    init: InitialData, ell: float, J: int, courant: float, mode: BoundaryMode
) -> WaveField:
    """Build the two starting levels from the initial data.

    Level 0 samples y0 at the nodes; level 1 is the second-order Taylor start
    u0 + dt*y1 + (lam^2/2)*Lap(u0) with the boundary Laplacian closed by the
    ghost node for the initial flux (zero except for instant feedback, where
    it is mu*y1(ell)).

    Raises:
        ConfigError: for J < 8 or a Courant number outside (0, 1].
    """
    if J < 8:
        raise ConfigError(f"need at least 8 spatial cells, got J={J}")
    if not (0.0 < courant <= 1.0):
        raise ConfigError(f"CFL violation: lambda must be in (0, 1], got {courant}")
    if ell <= 0.0:
        raise ConfigError(f"ell must be positive, got {ell}")
    h, dt, m = _adjust_time_step(ell, J, courant)
    lam = dt / h
    if mode.kind == "instant" and abs(1.0 - 2.0 * lam * mode.mu) < 1e-12:
        raise SingularFeedbackError(
            f"instant closure is singular at mu = 1/(2*lambda) = {1.0 / (2.0 * lam):.6g}"
        )

    x = h * np.arange(J + 1)
    u0 = _call_on(init.y0, x)
    v0 = _call_on(init.y1, x)
    if not (np.all(np.isfinite(u0)) and np.all(np.isfinite(v0))):
        raise ConfigError("initial data is not finite on [0, ell]")
    u0[0] = 0.0

    g0 = 0.0
    if mode.kind == "instant":
        g0 = mode.mu * float(v0[J])
    lap = np.zeros(J + 1)
    lap[1:-1] = u0[2:] - 2.0 * u0[1:-1] + u0[:-2]
    lap[J] = 2.0 * u0[J - 1] - 2.0 * u0[J] + 2.0 * h * g0
    u1 = u0 + dt * v0 + 0.5 * lam * lam * lap
    u1[0] = 0.0

    buffer = np.zeros(m)
    buffer[0] = (u1[J] - u0[J]) / dt
    return WaveField(
        ell=ell,
        J=J,
        h=h,
        dt=dt,
        courant=lam,
        requested_courant=courant,
        mode=mode,
        u_prev=u0,
        u_curr=u1,
        step_index=1,
        delay_steps=m,
        delay_buffer=buffer,
        initial_flux=g0,
        x=x,
        v0=v0,
    )


def step(field: WaveField) -> WaveField:
    """Advance the field one time step in place and return it."""
    up = field.u_prev
    uc = field.u_curr
    lam2 = field.courant * field.courant
    j = field.J
    n = field.step_index
    mode = field.mode

    slots = field.delay_buffer.shape[0]
    slot = n % slots

    if mode.kind == "instant":
        mu = mode.mu
        lam = field.courant
        u_end = (
            2.0 * uc[j] - up[j] + 2.0 * lam2 * (uc[j - 1] - uc[j]) - 2.0 * lam * mu * uc[j]
        ) / (1.0 - 2.0 * lam * mu)
    else:
        if mode.kind == "delayed" and n >= field.delay_steps:
            g = mode.mu * field.delay_buffer[slot]
        else:
            g = 0.0
        u_end = 2.0 * uc[j] - up[j] + lam2 * (
            2.0 * uc[j - 1] - 2.0 * uc[j] + 2.0 * field.h * g
        )

    new = up  # reuse the retiring level's storage
    new[1:-1] = 2.0 * uc[1:-1] - up[1:-1] + lam2 * (uc[2:] - 2.0 * uc[1:-1] + uc[:-2])
    new[0] = 0.0
    new[j] = u_end

    field.delay_buffer[slot] = (new[j] - uc[j]) / field.dt
    field.u_prev = uc
    field.u_curr = new
    field.step_index = n + 1
    return field


def _quadratic_energy(w: np.ndarray, v: np.ndarray, h: float) -> float:
    ux = np.empty_like(w)
    ux[1:-1] = (w[2:] - w[:-2]) / (2.0 * h)
    ux[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h)
    ux[-1] = (3.0 * w[-1] - 4.0 * w[-2] + w[-3]) / (2.0 * h)
    density = ux * ux + v * v
    interior = np.add.reduce(density[1:-1])
    return 0.5 * h * (interior + 0.5 * (density[0] + density[-1]))


def discrete_energy(field: WaveField) -> float:
    """Half-step energy between the two stored levels."""
    v = (field.u_curr - field.u_prev) / field.dt
    w = 0.5 * (field.u_curr + field.u_prev)
    return _quadratic_energy(w, v, field.h)


def initial_energy(field: WaveField) -> float:
    """Energy of the starting state (u^0 with the sampled initial velocity)."""
    return _quadratic_energy(field.u_prev, field.v0, field.h)


def _boundary_mode(config: SimConfig) -> BoundaryMode:
    if config.boundary == "free":
        return BoundaryMode.free_neumann()
    if config.boundary == "instant":
        return BoundaryMode.instant_feedback(config.mu)
    return BoundaryMode.delayed_feedback(config.mu)


def run(
    config: SimConfig, snapshot_times: tuple[float, ...] | None = None
) -> tuple[EnergyTrace, list[FieldSnapshot]]:
    """Step the scheme from t=0 to t_final, recording energies and snapshots.

    Energies are sampled every ``sample_stride`` steps (always including the
    first and last half step).  Snapshot times snap to the nearest step.
    """
    cfg = config.resolved()
    mode = _boundary_mode(cfg)
    init = resolve_initial(cfg)
    field = init_field(init, cfg.ell, cfg.J, cfg.courant, mode)

    total_steps = max(1, int(math.ceil(cfg.t_final / field.dt - 1e-9)))
    wanted = snapshot_times if snapshot_times is not None else cfg.snapshot_times
    snap_steps: dict[int, float] = {}
    for t in wanted:
        k = min(max(int(round(t / field.dt)), 0), total_steps)
        snap_steps.setdefault(k, t)

    stride = max(1, cfg.sample_stride)
    times = [0.0]
    energies = [initial_energy(field)]
    snapshots: list[FieldSnapshot] = []
    if 0 in snap_steps:
        snapshots.append(FieldSnapshot(0.0, field.x.copy(), field.u_prev.copy()))
    if 1 in snap_steps:
        snapshots.append(FieldSnapshot(field.dt, field.x.copy(), field.u_curr.copy()))

    last_recorded = 1
    while field.step_index < total_steps:
        step(field)
        n = field.step_index
        if n % stride == 0 or n == total_steps:
            if n != last_recorded:
                times.append((n - 0.5) * field.dt)
                energies.append(discrete_energy(field))
                last_recorded = n
        if n in snap_steps:
            snapshots.append(FieldSnapshot(n * field.dt, field.x.copy(), field.u_curr.copy()))

    meta = {
        "solver": "fdtd",
        "config": cfg.as_dict(),
        "dt": field.dt,
        "delay_steps": field.delay_steps,
        "lambda_actual": field.courant,
        "lambda_requested": field.requested_courant,
        "steps": total_steps,
    }
    return EnergyTrace(np.array(times), np.array(energies), meta), snapshots
