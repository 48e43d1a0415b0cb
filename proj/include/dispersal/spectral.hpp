#pragma once

#include <vector>

#include "dispersal/grid.hpp"
#include "dispersal/logistic.hpp"

namespace dispersal {

/// Principal (smallest) eigenpair of a symmetric operator.
struct EigenPair {
    double lambda = 0.0;
    SpatialField phi;
    double residual_inf = 0.0;
    double normalization = 1.0;
    int iterations = 0;
};

/// Principal eigenvalue curve sigma(alpha) with h = theta - m, together with
/// its analytic first derivative and the Taylor data at the lowest trait.
struct SigmaCurve {
    std::vector<double> alphas;
    std::vector<double> sigmas;
    std::vector<double> derivatives;
    double sigma0 = 0.0;  // sigma at the lowest trait
    double sigma1 = 0.0;  // d sigma / d alpha at the lowest trait
};

struct EigenSolveOptions {
    double rel_tol = 1e-9;      // residual target: rel_tol * (1 + |lambda|)
    double residual_scale = 1.0;  // measured on a vector scaled by this factor
    int max_iterations = 200;
    bool positive = true;  // enforce a strictly positive eigenvector
};

struct PrincipalPair {
    double lambda = 0.0;
    Vector vec;  // unit Euclidean norm
    double residual_inf = 0.0;
    int iterations = 0;
};

/// Smallest eigenpair of a sparse symmetric matrix by shifted inverse
/// iteration with Rayleigh-quotient shift updates. The first shift comes from
/// the Gershgorin lower bound; inner solves use a sparse direct
/// factorization. When `positive` is set, a final solve with the shifted
/// M-matrix restores strict entrywise positivity of the eigenvector.
PrincipalPair smallest_eigenpair(const SparseMatrix& matrix,
                                 const Vector* warm_start = nullptr,
                                 const EigenSolveOptions& options = {});

/// Principal eigenpair of -alpha Lap + h on the spatial grid with zero
/// Neumann flux; the eigenvector is positive and scaled so that the
/// quadrature of phi^2 equals `normalization`.
EigenPair principal_eigenpair(double alpha, const SpatialField& h,
                              double normalization,
                              const Vector* warm_start = nullptr,
                              const EigenSolveOptions& options = {});

/// Analytic derivative of the principal eigenvalue with respect to the
/// diffusivity: the gradient quadratic form of the eigenfunction,
/// integral |grad phi|^2 / integral phi^2. Exact for the discrete operator.
double eigen_derivative_alpha(const EigenPair& pair);

/// sigma*(alpha) over the requested diffusivities for h = theta - m with the
/// normalization integral phi^2 = integral theta^2. Also evaluates the Taylor
/// data sigma0, sigma1 at theta's own diffusivity.
SigmaCurve sigma_star_curve(const SpatialField& m, const LogisticSolution& theta,
                            const std::vector<double>& alphas);

/// (alpha * integral |grad phi|^2 + integral h phi^2) / integral phi^2.
double rayleigh_quotient(double alpha, const SpatialField& h,
                         const SpatialField& phi);

}  // namespace dispersal
