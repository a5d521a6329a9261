"""Simulation and stability-analysis toolkit for the 1D wave equation with
delayed boundary velocity feedback.

Two independent solvers cross-check each other: an exact method-of-
characteristics solver built on round-trip extension rules for the traveling
profile, and an explicit finite-difference scheme with a ring-buffer delay
line.  A spectral module analyzes the induced 2x2 recursion matrix, whose
spectral radius is below one exactly for feedback gains in (0, 1).
"""

from .analysis import (
    ComparisonReport,
    DecayFit,
    EnergyTrace,
    classify_stability,
    compare_solvers,
    convergence_order,
    fit_decay_rate,
    fit_with_fallback,
)
from .characteristics import (
    InitialData,
    ThetaTrace,
    build_theta,
    energy_exact,
    eval_field,
    extend_delay,
    extend_free,
    extend_instant,
    extend_reflect,
    q_vector,
    theta_prime_at,
)
from .config import SimConfig, load_tabulated, resolve_initial, sine_data, zero_data
from .errors import (
    ConfigError,
    CoverageError,
    DelayWaveError,
    FitError,
    SingularFeedbackError,
    TraceStateError,
)
from .fdtd import (
    BoundaryMode,
    FieldSnapshot,
    WaveField,
    discrete_energy,
    init_field,
    initial_energy,
    run,
    step,
)
from .runners import build_trace, characteristics_energy_trace, run_characteristics, run_solver
from .spectral import (
    SpectralReport,
    companion_matrix,
    discriminant,
    eigenvalues_closed_form,
    is_stable,
    power_iteration_radius,
    predicted_decay_rate,
    spectral_radius,
    spectral_report,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryMode",
    "ComparisonReport",
    "ConfigError",
    "CoverageError",
    "DecayFit",
    "DelayWaveError",
    "EnergyTrace",
    "FieldSnapshot",
    "FitError",
    "InitialData",
    "SimConfig",
    "SingularFeedbackError",
    "SpectralReport",
    "ThetaTrace",
    "TraceStateError",
    "WaveField",
    "build_theta",
    "build_trace",
    "characteristics_energy_trace",
    "classify_stability",
    "companion_matrix",
    "compare_solvers",
    "convergence_order",
    "discrete_energy",
    "discriminant",
    "eigenvalues_closed_form",
    "energy_exact",
    "eval_field",
    "extend_delay",
    "extend_free",
    "extend_instant",
    "extend_reflect",
    "fit_decay_rate",
    "fit_with_fallback",
    "init_field",
    "initial_energy",
    "is_stable",
    "load_tabulated",
    "power_iteration_radius",
    "predicted_decay_rate",
    "q_vector",
    "resolve_initial",
    "run",
    "run_characteristics",
    "run_solver",
    "sine_data",
    "spectral_radius",
    "spectral_report",
    "step",
    "theta_prime_at",
    "zero_data",
    "__version__",
]
