#pragma once

#include <limits>
#include <vector>

#include "dispersal/airy.hpp"
#include "dispersal/solver.hpp"

namespace dispersal {

/// Small-mutation theory prediction: the steady state concentrates on the
/// lowest trait with spatial carrier theta and layer profile eta*, so
///   u(x, alpha) ~ eps^(-2/3) theta(x) eta*((alpha - alpha_lo) / eps^(2/3)).
struct TheoryProfile {
    LogisticSolution theta;
    AiryProfile eta;
    double sigma1_star = 0.0;

    /// Predicted density sampled on a product grid at the given epsilon.
    StateField materialize(const TraitGrid& trait, double epsilon) const;

    /// Sup norm of the predicted rescaled profile, theta_max * eta(0).
    double sup_norm() const;
};

/// Per-epsilon diagnostics of one converged steady state.
struct SweepRecord {
    double epsilon = 0.0;
    double sigma0 = 0.0;    // principal eigenvalue at the lowest trait
    double sigma1 = 0.0;    // its analytic alpha-derivative
    double sup_u = 0.0;
    double uhat_err = 0.0;  // ||uhat - theta||_inf
    double profile_err = 0.0;
    double beta_hat = 0.0;  // fitted tail decay rate
    double mass_frac = 0.0;  // mass within the concentration band
    double loggrad_alpha = 0.0;
    double loggrad_x = 0.0;
    double residual_inf = 0.0;
    int iterations = 0;
    int trait_cells = 0;
    double mu1 = 0.0;
};

struct FitResult {
    double slope = 0.0;
    double stderr = 0.0;
    double ci_halfwidth = 0.0;  // two standard errors
};

struct ScalingFits {
    FitResult sigma0_slope;  // log(-sigma0) against log(eps), all points
    FitResult supu_slope;    // log(sup u) against log(eps), all points
    double ratio_at_min_eps = 0.0;  // -sigma0 / eps^(2/3) at the smallest eps
    double ratio_limit = 0.0;       // (sigma1*)^(2/3) A0
    std::vector<double> ratios;     // the three smallest epsilons
};

struct SweepReport {
    std::vector<SweepRecord> records;  // sorted by decreasing epsilon
    double sigma1_star = 0.0;
    double concentration_k = 0.0;  // K with integral_0^K eta* = 0.99
    double theory_sup = 0.0;
    ScalingFits fits;
    std::vector<SteadyState> states;  // populated when keep_states is set
};

/// Composes the theory chain: theta from the logistic module, sigma1* from
/// the eigenvalue module at h = theta - m, eta* from the layer module.
/// Requires a non-constant habitat with positive integral.
TheoryProfile build_theory_profile(const SpatialField& m,
                                   const ModelConfig& config);

/// sup over the product grid of |eps^(2/3) u - theta(x) eta*(s)|.
double profile_error(const SteadyState& state, const TheoryProfile& theory);

/// ||uhat - theta||_inf.
double uhat_error(const SteadyState& state, const LogisticSolution& theta);

/// Least-squares decay rate of log(max_x u) against the layer variable
/// s = (alpha - alpha_lo)/eps^(2/3), over samples above 1e-12 sup u and
/// inside [s_lo, s_hi]. Throws InsufficientTail when the window is too
/// short to fit.
double tail_decay_fit(const SteadyState& state, double s_lo = 1.0,
                      double s_hi = std::numeric_limits<double>::infinity());

/// Fraction of total mass carried by the trait band
/// [alpha_lo, alpha_lo + K eps^(2/3)], with fractional coverage of the
/// straddling cell.
double concentration_mass(const SteadyState& state, double k_band);

/// Scaling-law regressions over the sweep. Requires at least four epsilon
/// values spanning a factor of eight (the spec's decade-scale sweep).
ScalingFits scaling_fits(const std::vector<SweepRecord>& records,
                         double sigma1_star);

struct SweepConfig {
    SpatialField m;
    double alpha_lo = 0.5;
    double alpha_hi = 2.0;
    std::vector<double> epsilons;
    double steady_tol = 1e-9;
    double dt = 0.4;
    int trait_cells_override = 0;  // 0 = resolve the layer automatically
    bool keep_states = false;
};

/// Runs the steady solver across the epsilon sweep (largest first, each
/// solve continued from the previous one) and assembles the full report.
SweepReport run_sweep(const SweepConfig& config);

}  // namespace dispersal
