"""Exact solver for the string with delayed boundary velocity feedback.

The displacement on (0, ell) is represented as the difference of one
traveling profile evaluated on the two characteristics,

    y(x, t) = Theta(x + t) - Theta(t - x),

so the whole dynamics reduces to extension rules for the profile derivative
Theta' on a one-dimensional axis.  From the initial displacement/velocity
pair (y0, y1) the derivative on [-ell, ell] is

    Theta'(s) = y0'(-s)/2 - y1(-s)/2      for s in (-ell, 0),
    Theta'(s) = y0'(s)/2  + y1(s)/2       for s in [0, ell],

and beyond ell it is continued by one of three rules, each a pure index
shift of exactly one round-trip 2*ell:

    free (zero flux)        Theta'(s) = -Theta'(s - 2 ell)
    instant feedback        Theta'(s) = -((1 + mu)/(1 - mu)) Theta'(s - 2 ell)
    delayed feedback        Theta'(s) = (mu - 1) Theta'(s - 2 ell)
                                        - mu Theta'(s - 4 ell)
                            (after one free round trip on (ell, 3 ell])

The sample grid has spacing h = 2 ell / N so every rule is an exact index
shift by N; no interpolation enters the extension and the defining identities
hold bitwise at the nodes.  Theta itself is recovered from the trapezoid
cumulative sum normalized by Theta(-ell) = 0; the constant cancels in y.

The energy (1/2) int_0^ell (y_x^2 + y_t^2) dx equals
int_{t-ell}^{t+ell} Theta'(s)^2 ds, which is evaluated by trapezoid
quadrature on the same grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, CoverageError, SingularFeedbackError, TraceStateError

# Node-index slack, as a fraction of one grid cell.
INDEX_TOL = 1e-9


@dataclass(frozen=True)
class InitialData:
    """Initial displacement, its derivative, and initial velocity on [0, ell].

    The displacement must vanish at x = 0 (clamped end); all three callables
    must be finite on [0, ell].  They may be numpy-vectorized or plain
    scalar functions.
    """

    y0: Callable[[np.ndarray], np.ndarray]
    y0_prime: Callable[[np.ndarray], np.ndarray]
    y1: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ThetaTrace:
    """Sampled profile derivative Theta' on the uniform grid over [-ell, t_max].

    Attributes:
        ell: string length.
        n_per_half: samples per round-trip interval of length 2*ell, so the
            grid spacing is h = 2*ell/n_per_half and every interval endpoint
            ell + 2*j*ell lands on a node.
        h: grid spacing (carried explicitly so all node arithmetic shares
            one float value).
        samples: Theta' at nodes -ell + k*h.
        t_max: upper end of the covered interval.
        cumsum: running trapezoid integral of Theta' from -ell (cumsum[0]=0),
            used to reconstruct Theta up to its irrelevant constant.
        mode: extension rule that produced samples beyond ell: "free",
            "instant" or "delayed".
        mu: feedback gain of the extension rule (None for free).
    """

    ell: float
    n_per_half: int
    h: float
    samples: np.ndarray
    t_max: float
    cumsum: np.ndarray
    mode: str
    mu: float | None

    def node_times(self) -> np.ndarray:
        """All node coordinates -ell + k*h covered by the trace."""
        return -self.ell + self.h * np.arange(len(self.samples))


def _call_on(f: Callable, xs: np.ndarray) -> np.ndarray:
    """Evaluate a possibly non-vectorized callable on an array."""
    try:
        out = np.asarray(f(xs), dtype=float)
        if out.shape == xs.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(f(x)) for x in xs], dtype=float)


def _trap_cumsum(samples: np.ndarray, h: float) -> np.ndarray:
    inc = 0.5 * h * (samples[1:] + samples[:-1])
    return np.concatenate(([0.0], np.cumsum(inc)))


def _make_trace(
    ell: float, n: int, h: float, samples: np.ndarray, mode: str, mu: float | None
) -> ThetaTrace:
    t_max = -ell + (len(samples) - 1) * h
    return ThetaTrace(
        ell=ell,
        n_per_half=n,
        h=h,
        samples=samples,
        t_max=t_max,
        cumsum=_trap_cumsum(samples, h),
        mode=mode,
        mu=mu,
    )


def build_theta(init: InitialData, ell: float, n_per_half: int) -> ThetaTrace:
    """Sample Theta' on [-ell, ell] from the initial data.

    The two branch formulas come from differentiating the profile
    initialization exactly; no smoothing is applied.  The node at s = 0 uses
    the right-hand branch.

    Args:
        init: initial displacement/velocity bundle.
        ell: string length, must be positive.
        n_per_half: grid resolution N >= 2 per interval of length 2*ell.

    Raises:
        ConfigError: for non-positive ell, N < 2, y0(0) != 0, or non-finite
            sampled data.
    """
    if ell <= 0.0:
        raise ConfigError(f"ell must be positive, got {ell}")
    n = int(n_per_half)
    if n < 2:
        raise ConfigError(f"n_per_half must be at least 2, got {n_per_half}")
    h = 2.0 * ell / n
    nodes = -ell + h * np.arange(n + 1)
    left = nodes < 0.0
    samples = np.empty(n + 1)
    xs_left = -nodes[left]
    xs_right = nodes[~left]
    samples[left] = 0.5 * _call_on(init.y0_prime, xs_left) - 0.5 * _call_on(init.y1, xs_left)
    samples[~left] = 0.5 * _call_on(init.y0_prime, xs_right) + 0.5 * _call_on(init.y1, xs_right)

    y0_right = _call_on(init.y0, xs_right)
    if not (np.all(np.isfinite(samples)) and np.all(np.isfinite(y0_right))):
        raise ConfigError("initial data is not finite on [0, ell]")
    scale = max(1.0, float(np.max(np.abs(y0_right))))
    if abs(float(y0_right[0])) > 1e-9 * scale:
        raise ConfigError("y0(0) must vanish (clamped end), got y0(0)=%g" % y0_right[0])
    return _make_trace(ell, n, h, samples, "free", None)


def _covers_initial(trace: ThetaTrace) -> bool:
    return len(trace.samples) == trace.n_per_half + 1


def _covers_reflected(trace: ThetaTrace) -> bool:
    return len(trace.samples) == 2 * trace.n_per_half + 1


def _end_index(trace: ThetaTrace, t_max: float) -> int:
    """Smallest node index whose coordinate reaches t_max."""
    return int(math.ceil((t_max + trace.ell) / trace.h - INDEX_TOL))


def _extend_by_ratio(trace: ThetaTrace, ratio: float, k_end: int, mode: str, mu: float | None) -> ThetaTrace:
    n = trace.n_per_half
    old = len(trace.samples)
    s = np.empty(k_end + 1)
    s[:old] = trace.samples
    start = old
    while start <= k_end:
        stop = min(start + n, k_end + 1)
        s[start:stop] = ratio * s[start - n : stop - n]
        start = stop
    return _make_trace(trace.ell, n, trace.h, s, mode, mu)


def extend_reflect(trace: ThetaTrace) -> ThetaTrace:
    """Continue Theta' onto (ell, 3*ell] by the zero-flux reflection rule.

    Every new node satisfies samples[k] = -samples[k - N] exactly.

    Raises:
        TraceStateError: when the trace does not cover exactly [-ell, ell].
    """
    if trace.mode != "free" or not _covers_initial(trace):
        raise TraceStateError("extend_reflect requires a fresh trace covering [-ell, ell]")
    return _extend_by_ratio(trace, -1.0, 2 * trace.n_per_half, "free", None)


def extend_free(trace: ThetaTrace, t_max: float) -> ThetaTrace:
    """Continue the zero-flux reflection rule up to t_max (no feedback ever).

    Unlike :func:`extend_reflect`, which applies the single round trip that
    precedes delayed feedback, this keeps the boundary flux zero for all
    time.  Extending to an already covered t_max is a no-op.
    """
    if trace.mode != "free":
        raise TraceStateError("extend_free requires a trace in free mode")
    k_end = _end_index(trace, t_max)
    if k_end < len(trace.samples):
        return trace
    return _extend_by_ratio(trace, -1.0, k_end, "free", None)


def extend_instant(trace: ThetaTrace, mu: float, t_max: float) -> ThetaTrace:
    """Continue Theta' beyond ell under instantaneous velocity feedback.

    The flux law y_x(ell, t) = mu * y_t(ell, t) is active from t = 0, so
    there is no free round trip: every node beyond ell satisfies
    samples[k] = -((1 + mu)/(1 - mu)) * samples[k - N].

    Raises:
        SingularFeedbackError: for mu = 1 (the closure divides by 1 - mu).
        TraceStateError: when the trace was already extended.
        ConfigError: when t_max does not exceed ell.
    """
    if mu == 1.0:
        raise SingularFeedbackError("instant feedback is singular at mu = 1")
    if trace.mode != "free" or not _covers_initial(trace):
        raise TraceStateError("extend_instant requires a fresh trace covering [-ell, ell]")
    k_end = _end_index(trace, t_max)
    if k_end <= trace.n_per_half:
        raise ConfigError(f"t_max must exceed ell, got {t_max}")
    ratio = -(1.0 + mu) / (1.0 - mu)
    return _extend_by_ratio(trace, ratio, k_end, "instant", mu)


def extend_delay(trace: ThetaTrace, mu: float, t_max: float) -> ThetaTrace:
    """Continue Theta' beyond 3*ell by the delayed-feedback recursion.

    Every new node satisfies the exact index-shift identity

        samples[k] = (mu - 1) * samples[k - N] - mu * samples[k - 2N].

    Raises:
        TraceStateError: unless the trace covers exactly [-ell, 3*ell]
            (i.e. :func:`extend_reflect` was applied once).
        ConfigError: when t_max does not exceed 3*ell.
    """
    if trace.mode != "free" or not _covers_reflected(trace):
        raise TraceStateError("extend_delay requires a reflected trace covering [-ell, 3*ell]")
    n = trace.n_per_half
    k_end = _end_index(trace, t_max)
    if k_end <= 2 * n:
        raise ConfigError(f"t_max must exceed 3*ell, got {t_max}")
    s = np.empty(k_end + 1)
    s[: 2 * n + 1] = trace.samples
    start = 2 * n + 1
    while start <= k_end:
        stop = min(start + n, k_end + 1)
        s[start:stop] = (mu - 1.0) * s[start - n : stop - n] - mu * s[start - 2 * n : stop - 2 * n]
        start = stop
    return _make_trace(trace.ell, n, trace.h, s, "delayed", mu)


def _check_range(trace: ThetaTrace, z: np.ndarray, what: str) -> None:
    tol = INDEX_TOL * trace.h
    lo = float(np.min(z))
    hi = float(np.max(z))
    if lo < -trace.ell - tol or hi > trace.t_max + tol:
        raise CoverageError(
            f"{what} needs Theta' on [{lo:.6g}, {hi:.6g}] but the trace covers "
            f"[{-trace.ell:.6g}, {trace.t_max:.6g}]"
        )


def theta_prime_at(trace: ThetaTrace, z: np.ndarray | float) -> np.ndarray | float:
    """Theta' at arbitrary points: node values exactly, linear interpolation off-node."""
    arr = np.atleast_1d(np.asarray(z, dtype=float))
    _check_range(trace, arr, "theta_prime_at")
    vals = _prime_values(trace, arr)
    if np.isscalar(z) or np.asarray(z).ndim == 0:
        return float(vals[0])
    return vals


def _prime_values(trace: ThetaTrace, z: np.ndarray) -> np.ndarray:
    s = trace.samples
    last = len(s) - 1
    p = (z + trace.ell) / trace.h
    nearest = np.rint(p).astype(np.int64)
    np.clip(nearest, 0, last, out=nearest)
    on_node = np.abs(p - nearest) <= INDEX_TOL
    i = np.floor(p).astype(np.int64)
    np.clip(i, 0, last - 1, out=i)
    frac = p - i
    vals = s[i] * (1.0 - frac) + s[i + 1] * frac
    return np.where(on_node, s[nearest], vals)


def _theta_values(trace: ThetaTrace, z: np.ndarray) -> np.ndarray:
    s = trace.samples
    c = trace.cumsum
    last = len(s) - 1
    p = (z + trace.ell) / trace.h
    nearest = np.rint(p).astype(np.int64)
    np.clip(nearest, 0, last, out=nearest)
    on_node = np.abs(p - nearest) <= INDEX_TOL
    i = np.floor(p).astype(np.int64)
    np.clip(i, 0, last - 1, out=i)
    frac = p - i
    prime = s[i] * (1.0 - frac) + s[i + 1] * frac
    # exact integral of the piecewise-linear interpolant over the partial cell
    part = (frac * trace.h) * 0.5 * (s[i] + prime)
    return np.where(on_node, c[nearest], c[i] + part)


def eval_field(
    trace: ThetaTrace, x: np.ndarray | float, t: float
) -> tuple[np.ndarray | float, np.ndarray | float, np.ndarray | float]:
    """Displacement, velocity and slope at position(s) x and time t.

    Returns:
        (y, y_t, y_x) with y = Theta(x+t) - Theta(t-x),
        y_t = Theta'(x+t) - Theta'(t-x), y_x = Theta'(x+t) + Theta'(t-x).

    Raises:
        CoverageError: when t + ell exceeds the covered interval or x is
            outside [0, ell].
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    tol = INDEX_TOL * trace.h
    if np.min(xs) < -tol or np.max(xs) > trace.ell + tol:
        raise CoverageError("x must lie in [0, ell]")
    if t < -tol or t + trace.ell > trace.t_max + tol:
        raise CoverageError(
            f"time {t:.6g} not covered: need t + ell <= {trace.t_max:.6g}"
        )
    a = xs + t
    b = t - xs
    pa = _prime_values(trace, a)
    pb = _prime_values(trace, b)
    y = _theta_values(trace, a) - _theta_values(trace, b)
    y_t = pa - pb
    y_x = pa + pb
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(y[0]), float(y_t[0]), float(y_x[0])
    return y, y_t, y_x


def _window_trapezoid(vals: np.ndarray, h: float) -> float:
    # np.add.reduce keeps one summation order per window length, so equal
    # windows of identical values give bitwise-identical energies
    interior = np.add.reduce(vals[1:-1])
    return h * (interior + 0.5 * (vals[0] + vals[-1]))


def energy_exact(trace: ThetaTrace, t: float) -> float:
    """Energy at time t: trapezoid quadrature of Theta'^2 over [t-ell, t+ell].

    Node-aligned times integrate the stored samples directly; other times
    sample the linear interpolant on a shifted grid of the same spacing.
    """
    tol = INDEX_TOL * trace.h
    if t < -tol:
        raise CoverageError(f"t must be non-negative, got {t}")
    if t + trace.ell > trace.t_max + tol:
        raise CoverageError(
            f"energy at t={t:.6g} needs coverage up to {t + trace.ell:.6g}, "
            f"trace ends at {trace.t_max:.6g}"
        )
    n = trace.n_per_half
    p = t / trace.h
    lo = int(round(p))
    if abs(p - lo) <= INDEX_TOL and 0 <= lo and lo + n < len(trace.samples):
        window = trace.samples[lo : lo + n + 1]
        return _window_trapezoid(window * window, trace.h)
    zs = (t - trace.ell) + trace.h * np.arange(n + 1)
    vals = _prime_values(trace, zs)
    return _window_trapezoid(vals * vals, trace.h)


def q_vector(trace: ThetaTrace, y: float) -> tuple[float, float]:
    """The pair (Theta'(y), Theta'(y - 2*ell)) driving the round-trip recursion."""
    shift = 2.0 * trace.ell
    arr = np.array([y, y - shift])
    _check_range(trace, arr, "q_vector")
    vals = _prime_values(trace, arr)
    return float(vals[0]), float(vals[1])
