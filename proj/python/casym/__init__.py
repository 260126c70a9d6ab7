"""Communication-asymmetry opinion model: simulation, fixed points and post statistics."""

from ._core import (
    ConvergenceError,
    DegenerateDiffusionError,
    UndefinedStatisticError,
    ValidationError,
    case_study,
    closed_form_rho0,
    consistency,
    ensemble,
    feedback_prob,
    fpa_scan,
    joint_fixed_point,
    normalized_autocovariance,
    pearson,
    resolve_config,
    run_cli,
    scenario,
    simulate,
    stationary_density,
    two_influencer_map,
    update_opinion,
    visibility,
    with_overrides,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DegenerateDiffusionError",
    "UndefinedStatisticError",
    "ValidationError",
    "case_study",
    "closed_form_rho0",
    "consistency",
    "ensemble",
    "feedback_prob",
    "fpa_scan",
    "joint_fixed_point",
    "normalized_autocovariance",
    "pearson",
    "resolve_config",
    "run_cli",
    "scenario",
    "simulate",
    "stationary_density",
    "two_influencer_map",
    "update_opinion",
    "visibility",
    "with_overrides",
]
