#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dispersal/grid.hpp"
#include "dispersal/logistic.hpp"
#include "dispersal/spectral.hpp"

namespace dispersal {

/// Problem definition for the mutation-selection equation
///   alpha Lap_x u + eps^2 d^2_alpha u + (m(x) - uhat(x)) u = 0
/// with zero-flux closure in both directions.
struct ModelConfig {
    SpatialField m;
    TraitGrid trait;
    double epsilon = 0.0;
    double steady_tol = 1e-9;  // residual_inf <= steady_tol * (1 + sup u)
    double dt = 0.4;           // default time step for the evolution scheme
    bool trivial_mode = false;  // allow constant habitat
    int max_outer = 400;

    /// Trait cell count that keeps at least eight cells inside the eps^(2/3)
    /// boundary layer, with a floor of 128.
    static int default_trait_cells(double alpha_lo, double alpha_hi,
                                   double epsilon);

    /// Rejects constant m unless trivial_mode is set; checks finiteness and
    /// epsilon > 0. Integral positivity of m is deliberately not enforced
    /// here: the existence of a steady state is decided at runtime by the
    /// sign of the principal eigenvalue mu1.
    void validate() const;

    bool habitat_constant() const;
};

/// Converged positive steady state together with its derived fields.
struct SteadyState {
    StateField u;
    SpatialField u_hat;  // trait integral of u
    SpatialField v;      // trait integral weighted by the trait value
    double residual_inf = 0.0;
    int iterations = 0;
    double epsilon = 0.0;
    double mu1 = 0.0;  // existence eigenvalue observed before solving

    /// Returns human-readable descriptions of violated invariants (empty
    /// when the state is healthy). `seed` drives the randomized Rayleigh
    /// lower-bound probes; pass the experiment seed for reproducibility.
    std::vector<std::string> check_invariants(const ModelConfig& config,
                                              unsigned seed = 0) const;
};

/// Diffusion part alpha(a) Lap_x + eps^2 d^2_a as one sparse operator on the
/// product grid (x fastest).
SparseMatrix assemble_diffusion_operator(const ModelConfig& config);

/// PDE residual of a candidate state under the given configuration.
Vector steady_residual(const ModelConfig& config, const SparseMatrix& diffusion,
                       const StateField& u);

/// Semi-implicit evolution of the time-dependent equation: diffusion implicit,
/// reaction explicit. Positivity is preserved while
/// dt * max(uhat - m) < 1; violations raise NonPositive, and a sup-norm
/// above 1e8 raises BlowUp.
StateField evolve(const ModelConfig& config, const StateField& u0, double t_end,
                  double dt);

/// Runs the evolution scheme until the steady residual drops below the
/// config tolerance (independent route to the steady state; also the
/// fallback when the eigenvalue-based iteration stalls).
StateField evolve_until_steady(const ModelConfig& config, const StateField& u0,
                               double dt, double max_time);

/// Principal eigenvalue mu1 of the linearization at zero (potential -m).
/// Negative mu1 is the existence criterion for a positive steady state.
double existence_mu1(const ModelConfig& config);

/// Positive steady state via the frozen-potential eigenvalue iteration:
/// the inner step solves the principal eigenpair of the diffusion operator
/// with potential h = uhat - m frozen, the outer loop updates h with
/// Anderson-accelerated mixing, and the returned state is rescaled through
/// the mass identity. Throws NonExistence when mu1 >= 0 (no positive steady
/// state), NonConvergence on budget exhaustion.
SteadyState solve_steady_state(const ModelConfig& config,
                               const StateField* initial_guess = nullptr);

/// Transfers a converged state to a new epsilon / trait grid by rescaling
/// the boundary-layer variable (continuation initial guess for sweeps).
StateField rescale_state(const SteadyState& previous, const ModelConfig& next);

}  // namespace dispersal
