#pragma once

#include "dispersal/grid.hpp"

namespace dispersal {

/// Positive steady state of the spatial logistic equation
///   alpha * Lap(theta) + theta * (m - theta) = 0,  zero Neumann flux.
struct LogisticSolution {
    SpatialField theta;
    double alpha = 0.0;
    double residual_inf = 0.0;
    int iterations = 0;
};

/// Solves for the unique positive steady state at diffusivity `alpha`.
///
/// Newton iteration with positivity-preserving damping; falls back to
/// semi-implicit pseudo-time marching when Newton stalls. The default
/// initial guess is the pointwise supersolution-like max(m, delta); a custom
/// positive start can be supplied instead.
///
/// Throws NonConvergence when the iteration budget is exhausted and
/// NegativeSolution if damping cannot keep the iterate positive; both signal
/// a bad grid or tolerance rather than model failure.
LogisticSolution solve_theta(double alpha, const SpatialField& m,
                             double tol = 1e-10,
                             const SpatialField* initial_guess = nullptr);

}  // namespace dispersal
