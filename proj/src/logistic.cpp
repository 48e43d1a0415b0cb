#include "dispersal/logistic.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace dispersal {

namespace {

Vector logistic_residual(double alpha, const SparseMatrix& lap, const Vector& m,
                         const Vector& theta) {
    return alpha * (lap * theta) +
           theta.cwiseProduct(m - theta);
}

}  // namespace

LogisticSolution solve_theta(double alpha, const SpatialField& m, double tol,
                             const SpatialField* initial_guess) {
    if (!(alpha > 0.0)) {
        throw ConfigError("solve_theta: alpha must be positive");
    }
    if (!m.all_finite()) {
        throw ConfigError("solve_theta: habitat field has non-finite entries");
    }
    const LinearOperator lap = build_spatial_laplacian(m.grid());
    const Vector& mv = m.values();
    const int n = m.size();

    constexpr double kFloor = 1e-3;
    Vector theta;
    if (initial_guess != nullptr) {
        if (initial_guess->grid() != m.grid()) {
            throw GridMismatch("solve_theta: initial guess on a different grid");
        }
        if (!(initial_guess->min() > 0.0)) {
            throw NegativeSolution("solve_theta: initial guess must be positive");
        }
        theta = initial_guess->values();
    } else {
        theta = mv.cwiseMax(kFloor);
    }

    Eigen::SparseLU<SparseMatrix> lu;
    const int max_newton = 100;
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
    int stalled = 0;

    for (int it = 0; it < max_newton; ++it) {
        ++iterations;
        Vector f = logistic_residual(alpha, lap.matrix, mv, theta);
        residual = f.cwiseAbs().maxCoeff();
        if (residual <= tol) {
            return LogisticSolution{SpatialField(m.grid(), std::move(theta)),
                                    alpha, residual, iterations};
        }

        SparseMatrix jac = alpha * lap.matrix;
        Vector diag = mv - 2.0 * theta;
        for (int i = 0; i < n; ++i) jac.coeffRef(i, i) += diag[i];
        jac.makeCompressed();
        lu.compute(jac);
        if (lu.info() != Eigen::Success) {
            ++stalled;
        } else {
            Vector step = lu.solve(-f);
            // Damp to stay in the positive cone and to decrease the residual.
            double s = 1.0;
            for (int i = 0; i < n; ++i) {
                if (step[i] < 0.0) {
                    s = std::min(s, -0.9 * theta[i] / step[i]);
                }
            }
            bool accepted = false;
            for (int half = 0; half < 30 && !accepted; ++half) {
                Vector trial = theta + s * step;
                if (trial.minCoeff() > 0.0) {
                    const double trial_res =
                        logistic_residual(alpha, lap.matrix, mv, trial)
                            .cwiseAbs()
                            .maxCoeff();
                    if (trial_res < residual) {
                        theta = std::move(trial);
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if (accepted) {
                stalled = 0;
                continue;
            }
            ++stalled;
        }

        // Semi-implicit pseudo-time fallback:
        //   (I - dtau (alpha Lap + diag(m - theta))) theta_new = theta.
        // The matrix is an M-matrix for moderate dtau, so the step keeps
        // the iterate positive.
        const double dtau = 0.5 / (1.0 + mv.cwiseAbs().maxCoeff());
        SparseMatrix march = -dtau * alpha * lap.matrix;
        for (int i = 0; i < n; ++i) {
            march.coeffRef(i, i) += 1.0 - dtau * (mv[i] - theta[i]);
        }
        march.makeCompressed();
        lu.compute(march);
        if (lu.info() != Eigen::Success) {
            throw NonConvergence("solve_theta: pseudo-time factorization failed");
        }
        theta = lu.solve(theta);
        if (theta.minCoeff() <= 0.0) {
            throw NegativeSolution(
                "solve_theta: iterate left the positive cone");
        }
        if (stalled > 40) {
            break;
        }
    }
    throw NonConvergence("solve_theta: residual " + std::to_string(residual) +
                         " above tolerance after " +
                         std::to_string(iterations) + " iterations");
}

}  // namespace dispersal
