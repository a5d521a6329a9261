"""Stability analysis of the two-term boundary recursion.

Successive round-trip segments of the characteristic profile are related by a
2x2 companion matrix

    G = [[mu - 1, -mu],
         [1,       0]],

whose characteristic polynomial is p(z) = z^2 + (1 - mu) z + mu.  Its roots

    z = (mu - 1 +/- sqrt(mu^2 - 6 mu + 1)) / 2

are a real pair when the discriminant mu^2 - 6 mu + 1 is non-negative and a
conjugate pair of modulus sqrt(mu) otherwise.  The spectral radius is below 1
exactly for mu in (0, 1); in that window the energy decays like
exp(-omega t) with omega = -ln(rho) / ell.

All eigenvalue arithmetic is closed-form on real/imaginary parts; no general
eigensolver is involved.  ``power_iteration_radius`` provides an independent
numeric cross-check that only uses the action of the matrix.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# Discriminants closer to zero than this are treated as a double root
# (mu = 3 - 2*sqrt(2) is the only such point in the stability window).
DOUBLE_ROOT_TOL = 1e-12


@dataclass(frozen=True)
class SpectralReport:
    """Full stability verdict for one feedback gain.

    Attributes:
        mu: feedback gain.
        eigenvalues: both roots of the recursion polynomial.
        rho: spectral radius (max eigenvalue modulus).
        discriminant: mu^2 - 6 mu + 1.
        simple: True when the two eigenvalues are distinct.
        stable: True when rho < 1, equivalently mu in (0, 1).
        predicted_omega: energy decay rate -ln(rho)/ell, or None when the
            system is not stable or no length was supplied.
    """

    mu: float
    eigenvalues: tuple[complex, complex]
    rho: float
    discriminant: float
    simple: bool
    stable: bool
    predicted_omega: float | None


def companion_matrix(mu: float) -> np.ndarray:
    """Companion matrix of the round-trip recursion for gain ``mu``."""
    return np.array([[mu - 1.0, -mu], [1.0, 0.0]])


def discriminant(mu: float) -> float:
    """Discriminant mu^2 - 6 mu + 1 of the recursion polynomial."""
    return mu * mu - 6.0 * mu + 1.0


def eigenvalues_closed_form(mu: float) -> tuple[complex, complex]:
    """Both roots of z^2 + (1 - mu) z + mu = 0.

    Real pair for non-negative discriminant, conjugate pair otherwise.  The
    root with the plus sign comes first.
    """
    d = discriminant(mu)
    if d >= 0.0:
        r = math.sqrt(d)
        return (complex((mu - 1.0 + r) / 2.0, 0.0), complex((mu - 1.0 - r) / 2.0, 0.0))
    r = math.sqrt(-d)
    return (complex((mu - 1.0) / 2.0, r / 2.0), complex((mu - 1.0) / 2.0, -r / 2.0))


def spectral_radius(mu: float) -> float:
    """Largest eigenvalue modulus of the recursion matrix."""
    lam1, lam2 = eigenvalues_closed_form(mu)
    return max(abs(lam1), abs(lam2))


def is_stable(mu: float) -> bool:
    """True when the recursion is a strict contraction, i.e. mu in (0, 1)."""
    return 0.0 < mu < 1.0


def predicted_decay_rate(mu: float, ell: float) -> float:
    """Energy decay rate omega = -ln(rho)/ell for a stable gain.

    Raises:
        ConfigError: when mu is outside (0, 1) or ell is not positive.
    """
    if not is_stable(mu):
        raise ConfigError(f"decay rate is only defined for mu in (0, 1), got mu={mu}")
    if ell <= 0.0:
        raise ConfigError(f"ell must be positive, got {ell}")
    return -math.log(spectral_radius(mu)) / ell


def power_iteration_radius(mat: np.ndarray, iterations: int = 200) -> float:
    """Spectral radius of a real 2x2 matrix from iterating its action.

    Plain power iteration cannot resolve a conjugate eigenvalue pair (the
    iterates never settle on one direction), so after the iteration the
    dominant vector is re-mixed with a fixed generic vector and the minimal
    two-term recurrence ``A^2 w = s A w - p w`` is fitted by least squares;
    the radius is the largest root modulus of z^2 - s z + p.
    """
    a = np.asarray(mat, dtype=float)
    v = np.array([1.0 + 0.5j, -0.75 + 0.25j])
    v /= np.linalg.norm(v)
    for _ in range(iterations):
        w = a @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
    w0 = v + np.array([0.6 - 0.2j, 0.1 + 0.9j])
    w0 /= np.linalg.norm(w0)
    w1 = a @ w0
    w2 = a @ w1
    w3 = a @ w2
    lhs = np.array(
        [
            [w1[0], -w0[0]],
            [w1[1], -w0[1]],
            [w2[0], -w1[0]],
            [w2[1], -w1[1]],
        ]
    )
    rhs = np.array([w2[0], w2[1], w3[0], w3[1]])
    (s, p), *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    root_term = cmath.sqrt(s * s - 4.0 * p)
    z1 = (s + root_term) / 2.0
    z2 = (s - root_term) / 2.0
    return float(max(abs(z1), abs(z2)))


def spectral_report(mu: float, ell: float | None = None) -> SpectralReport:
    """Assemble the eigenvalues, radius and stability verdict for ``mu``."""
    eig = eigenvalues_closed_form(mu)
    rho = max(abs(eig[0]), abs(eig[1]))
    disc = discriminant(mu)
    stable = is_stable(mu)
    omega = None
    if stable and ell is not None:
        omega = predicted_decay_rate(mu, ell)
    return SpectralReport(
        mu=mu,
        eigenvalues=eig,
        rho=rho,
        discriminant=disc,
        simple=abs(disc) > DOUBLE_ROOT_TOL,
        stable=stable,
        predicted_omega=omega,
    )
