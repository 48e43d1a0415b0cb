#pragma once

#include <vector>

#include "dispersal/grid.hpp"
#include "dispersal/logistic.hpp"

namespace dispersal {

/// k competing species with distinct diffusivities, identical habitat
/// response, and mutation exchange through the matrix M:
///   d u_i / dt = alpha_i Lap u_i + (m - sum_j u_j) u_i + eps^2 sum_j M_ij u_j.
struct DiscreteTraitSystem {
    std::vector<double> alphas;  // strictly increasing, positive
    Eigen::MatrixXd mutation;    // M_ii < 0, M_ij >= 0 off the diagonal
    double epsilon = 0.0;        // sqrt of the mutation rate eps^2
    SpatialField m;

    int species() const { return static_cast<int>(alphas.size()); }
    void validate() const;
};

/// Nearest-neighbour mutation matrix with zero column sums, scaled like the
/// second-difference stencil of a k-cell trait grid so the continuum solver
/// on that grid is the exact cross-check.
Eigen::MatrixXd tridiagonal_mutation(int k, double spacing);

/// Builds the system whose mutation stencil matches the continuum
/// discretization of [alpha_lo, alpha_hi] with k cells.
DiscreteTraitSystem from_trait_grid(const TraitGrid& trait, double epsilon,
                                    const SpatialField& m);

/// Semi-implicit evolution (diffusion implicit, reaction and mutation
/// explicit). Preserves positivity under the dt contract; BlowUp and
/// NonPositive mirror the continuum solver.
std::vector<SpatialField> evolve_discrete(const DiscreteTraitSystem& system,
                                          const std::vector<SpatialField>& u0,
                                          double t_end, double dt);

/// Runs the evolution until the steady residual of every species drops below
/// tol * (1 + sup). Requires eps > 0 (mutation selects the unique positive
/// equilibrium).
std::vector<SpatialField> steady_discrete(const DiscreteTraitSystem& system,
                                          double tol, double dt = 0.05,
                                          double max_time = 2e4);

/// Max residual of the coupled steady equations for a candidate state.
double discrete_residual(const DiscreteTraitSystem& system,
                         const std::vector<SpatialField>& u);

/// Mass of each species under the spatial quadrature.
std::vector<double> species_masses(const DiscreteTraitSystem& system,
                                   const std::vector<SpatialField>& u);

}  // namespace dispersal
