"""Numerical laboratory for the degenerate nonlocal parabolic flow

    u_t = u^p (u_xx + u - mean(u)),   x in [0, a],   Neumann ends,   p > 1.

The package provides the cosine-spectral discretization, the conserved
and dissipated diagnostics, the steady-state family and its limit
selection, an adaptive positivity-aware time stepper, canned experiment
drivers, and a command line front end.
"""

from .errors import (
    ConfigError,
    DomainNotMultipleOfPi,
    ExponentOutOfRange,
    NFlowError,
    NonPositiveField,
    NoRoot,
    StepCollapse,
)
from .spectral import (
    Field,
    Grid,
    from_coeffs,
    integrate_power,
    make_field,
    make_grid,
    mean,
    multiple_of_pi,
    second_derivative,
    to_coeffs,
)
from .diagnostics import (
    DiagnosticsRecord,
    closure_integral,
    conserved_integral,
    dissipation_rate,
    energy,
    energy_quadrature,
    ls_check,
    ls_constant,
    lyapunov_value,
    snapshot,
    stationarity_residual,
)
from .steady import (
    ClassifyResult,
    Constant,
    Cosine,
    Degenerate,
    LimitPrediction,
    NoMatch,
    SteadyState,
    classify,
    compute_A0,
    cosine_family_integral,
    match_steady_state,
    predict_limit,
    solve_BA,
    steady_to_json,
)
from .evolution import SimOutcome, SolverConfig, rhs, simulate, step
from .experiments import (
    CurveResult,
    ExperimentSpec,
    SweepResult,
    convergence_specs,
    dichotomy_specs,
    reconstruct_curve,
    run_convergence,
    run_dichotomy,
    run_ls_suite,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "NFlowError",
    "NonPositiveField",
    "DomainNotMultipleOfPi",
    "ExponentOutOfRange",
    "NoRoot",
    "StepCollapse",
    "ConfigError",
    # spectral
    "Grid",
    "Field",
    "make_grid",
    "make_field",
    "multiple_of_pi",
    "to_coeffs",
    "from_coeffs",
    "second_derivative",
    "mean",
    "integrate_power",
    # diagnostics
    "DiagnosticsRecord",
    "energy",
    "energy_quadrature",
    "conserved_integral",
    "dissipation_rate",
    "ls_constant",
    "ls_check",
    "closure_integral",
    "lyapunov_value",
    "stationarity_residual",
    "snapshot",
    # steady states
    "SteadyState",
    "Constant",
    "Cosine",
    "Degenerate",
    "NoMatch",
    "ClassifyResult",
    "LimitPrediction",
    "classify",
    "predict_limit",
    "compute_A0",
    "solve_BA",
    "match_steady_state",
    "cosine_family_integral",
    "steady_to_json",
    # evolution
    "SolverConfig",
    "SimOutcome",
    "rhs",
    "step",
    "simulate",
    # experiments
    "ExperimentSpec",
    "SweepResult",
    "CurveResult",
    "run_dichotomy",
    "run_convergence",
    "run_sweep",
    "run_ls_suite",
    "reconstruct_curve",
    "convergence_specs",
    "dichotomy_specs",
]
