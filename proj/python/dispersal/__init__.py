"""Steady states and boundary-layer diagnostics of a mutation-selection
model for the evolution of random dispersal.

The heavy lifting lives in the compiled extension; this package re-exports
its public names.
"""

from ._core import (  # noqa: F401
    AiryProfile,
    BlowUpError,
    ConfigurationError,
    DiscreteTraitSystem,
    DispersalError,
    EigenPair,
    FitResult,
    GridMismatchError,
    InvalidA1Error,
    LogisticSolution,
    ModelConfig,
    NonConvergenceError,
    NonExistenceError,
    NonPositiveError,
    ScalingFits,
    SigmaCurve,
    SpatialField,
    SpatialGrid,
    StateField,
    SteadyState,
    SweepRecord,
    SweepReport,
    TheoryProfile,
    TraitGrid,
    airy_ai,
    airy_ai_prime,
    build_eta_star,
    build_theory_profile,
    concentration_mass,
    discrete_residual,
    eigen_derivative_alpha,
    evolve,
    evolve_discrete,
    evolve_until_steady,
    existence_mu1,
    find_a0,
    from_trait_grid,
    integrate_spatial,
    integrate_trait,
    principal_eigenpair,
    profile_error,
    rayleigh_quotient,
    run_experiment,
    run_sweep,
    sigma_star_curve,
    solve_steady_state,
    solve_theta,
    species_masses,
    steady_discrete,
    tail_decay_fit,
    tridiagonal_mutation,
    uhat_error,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = getattr(__import__("dispersal._core", fromlist=["_core"]),
                      "__version__", "dev")
