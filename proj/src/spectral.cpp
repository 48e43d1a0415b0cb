#include "dispersal/spectral.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dispersal {

namespace {

double gershgorin_lower_bound(const SparseMatrix& a) {
    double bound = std::numeric_limits<double>::infinity();
    for (int col = 0; col < a.outerSize(); ++col) {
        double diag = 0.0;
        double off = 0.0;
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
            if (it.row() == it.col()) {
                diag = it.value();
            } else {
                off += std::abs(it.value());
            }
        }
        bound = std::min(bound, diag - off);
    }
    return bound;
}

SparseMatrix shifted(const SparseMatrix& a, double shift) {
    SparseMatrix s = a;
    for (int i = 0; i < s.rows(); ++i) s.coeffRef(i, i) -= shift;
    s.makeCompressed();
    return s;
}

}  // namespace

PrincipalPair smallest_eigenpair(const SparseMatrix& matrix,
                                 const Vector* warm_start,
                                 const EigenSolveOptions& options) {
    const int n = static_cast<int>(matrix.rows());
    Vector v;
    if (warm_start != nullptr && warm_start->size() == n &&
        warm_start->allFinite() && warm_start->norm() > 0.0) {
        v = *warm_start / warm_start->norm();
    } else {
        v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    }

    const double lb = gershgorin_lower_bound(matrix);
    double shift = lb - 0.01 * (1.0 + std::abs(lb));
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(shifted(matrix, shift));
    if (lu.info() != Eigen::Success) {
        throw NonConvergence("smallest_eigenpair: initial factorization failed");
    }

    double rho = v.dot(matrix * v);
    double residual_inf = std::numeric_limits<double>::infinity();
    int since_refactor = 0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        Vector z = lu.solve(v);
        const double zn = z.norm();
        if (!(zn > 0.0) || !z.allFinite()) {
            throw NonConvergence(
                "smallest_eigenpair: inverse iteration produced a degenerate "
                "vector (ill-conditioned shift)");
        }
        v = z / zn;
        Vector av = matrix * v;
        rho = v.dot(av);
        Vector r = av - rho * v;
        residual_inf = r.cwiseAbs().maxCoeff() * options.residual_scale;
        const double target = options.rel_tol * (1.0 + std::abs(rho));
        if (residual_inf <= target) {
            if (options.positive) {
                // One more solve through the shifted M-matrix maps the
                // non-negative part of v to a strictly positive vector.
                if (v.sum() < 0.0) v = -v;
                const double r2 = r.norm();
                const double safe_shift =
                    rho - std::max(1e-3 * (1.0 + std::abs(rho)), 4.0 * r2);
                Eigen::SimplicialLDLT<SparseMatrix> ldlt;
                ldlt.compute(shifted(matrix, safe_shift));
                if (ldlt.info() == Eigen::Success) {
                    Vector pos = ldlt.solve(v.cwiseMax(0.0));
                    const double pn = pos.norm();
                    if (pn > 0.0 && pos.allFinite() && pos.minCoeff() > 0.0) {
                        v = pos / pn;
                        av = matrix * v;
                        rho = v.dot(av);
                        residual_inf = (av - rho * v).cwiseAbs().maxCoeff() *
                                       options.residual_scale;
                    }
                }
                if (v.sum() < 0.0) v = -v;
            }
            return PrincipalPair{rho, std::move(v), residual_inf, it};
        }
        ++since_refactor;
        if (since_refactor >= 2) {
            // Rayleigh-quotient shift, guarded below the eigenvalue by the
            // residual norm so the factorized matrix stays (near) definite.
            const double r2 = r.norm();
            const double next = rho - std::max(2.0 * r2, 1e-14 * (1.0 + std::abs(rho)));
            if (std::abs(next - shift) >
                1e-4 * (1.0 + std::abs(rho))) {
                shift = next;
                lu.compute(shifted(matrix, shift));
                if (lu.info() != Eigen::Success) {
                    throw NonConvergence(
                        "smallest_eigenpair: refactorization failed");
                }
                since_refactor = 0;
            }
        }
    }
    throw NonConvergence("smallest_eigenpair: residual " +
                         std::to_string(residual_inf) + " after " +
                         std::to_string(options.max_iterations) +
                         " iterations");
}

EigenPair principal_eigenpair(double alpha, const SpatialField& h,
                              double normalization, const Vector* warm_start,
                              const EigenSolveOptions& options) {
    if (!(alpha > 0.0)) {
        throw ConfigError("principal_eigenpair: alpha must be positive");
    }
    if (!h.all_finite()) {
        throw ConfigError("principal_eigenpair: potential has non-finite entries");
    }
    if (!(normalization > 0.0)) {
        throw ConfigError("principal_eigenpair: normalization must be positive");
    }
    const LinearOperator lap = build_spatial_laplacian(h.grid());
    SparseMatrix a = -alpha * lap.matrix;
    for (int i = 0; i < h.size(); ++i) a.coeffRef(i, i) += h[i];
    a.makeCompressed();

    const double cell = h.grid().cell_volume();
    EigenSolveOptions opts = options;
    // The returned eigenvector is scaled to integral phi^2 = normalization;
    // measure the residual at that scale.
    opts.residual_scale = std::sqrt(normalization / cell);
    PrincipalPair pair = smallest_eigenpair(a, warm_start, opts);
    if (opts.positive && pair.vec.minCoeff() <= 0.0) {
        throw NonPositive(
            "principal_eigenpair: eigenvector not strictly positive "
            "(discretization bug)");
    }
    Vector phi = pair.vec * std::sqrt(normalization / cell);
    return EigenPair{pair.lambda, SpatialField(h.grid(), std::move(phi)),
                     pair.residual_inf, normalization, pair.iterations};
}

double eigen_derivative_alpha(const EigenPair& pair) {
    const LinearOperator lap = build_spatial_laplacian(pair.phi.grid());
    const Vector& phi = pair.phi.values();
    const double num = -phi.dot(lap.matrix * phi);
    const double den = phi.squaredNorm();
    return num / den;
}

SigmaCurve sigma_star_curve(const SpatialField& m, const LogisticSolution& theta,
                            const std::vector<double>& alphas) {
    if (m.grid() != theta.theta.grid()) {
        throw GridMismatch("sigma_star_curve: m and theta on different grids");
    }
    SpatialField h(m.grid(), theta.theta.values() - m.values());
    const double normalization =
        integrate_spatial(SpatialField(m.grid(),
                                       theta.theta.values().cwiseAbs2()));
    SigmaCurve curve;
    curve.alphas = alphas;
    const Vector* warm = &theta.theta.values();
    Vector prev;
    for (double alpha : alphas) {
        EigenPair pair = principal_eigenpair(alpha, h, normalization, warm);
        curve.sigmas.push_back(pair.lambda);
        curve.derivatives.push_back(eigen_derivative_alpha(pair));
        prev = pair.phi.values();
        warm = &prev;
    }
    EigenPair base =
        principal_eigenpair(theta.alpha, h, normalization, &theta.theta.values());
    curve.sigma0 = base.lambda;
    curve.sigma1 = eigen_derivative_alpha(base);
    return curve;
}

double rayleigh_quotient(double alpha, const SpatialField& h,
                         const SpatialField& phi) {
    if (h.grid() != phi.grid()) {
        throw GridMismatch("rayleigh_quotient: fields on different grids");
    }
    const Vector& p = phi.values();
    const double den = p.squaredNorm();
    if (!(den > 0.0)) {
        throw ZeroField("rayleigh_quotient: phi vanishes identically");
    }
    const LinearOperator lap = build_spatial_laplacian(phi.grid());
    const double grad = -p.dot(lap.matrix * p);
    const double pot = p.cwiseAbs2().dot(h.values());
    return (alpha * grad + pot) / den;
}

}  // namespace dispersal
