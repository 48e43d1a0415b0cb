#include "dispersal/discrete.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace dispersal {

namespace {

std::vector<Eigen::SimplicialLDLT<SparseMatrix>> factor_steppers(
    const DiscreteTraitSystem& system, double dt) {
    const LinearOperator lap = build_spatial_laplacian(system.m.grid());
    std::vector<Eigen::SimplicialLDLT<SparseMatrix>> factors(system.species());
    for (int i = 0; i < system.species(); ++i) {
        SparseMatrix stepper = -dt * system.alphas[i] * lap.matrix;
        for (Eigen::Index d = 0; d < stepper.rows(); ++d) {
            stepper.coeffRef(d, d) += 1.0;
        }
        stepper.makeCompressed();
        factors[i].compute(stepper);
        if (factors[i].info() != Eigen::Success) {
            throw NonConvergence("discrete: stepper factorization failed");
        }
    }
    return factors;
}

std::vector<Vector> explicit_terms(const DiscreteTraitSystem& system,
                                   const std::vector<Vector>& u, double dt) {
    const int k = system.species();
    Vector total = Vector::Zero(system.m.size());
    for (const auto& ui : u) total += ui;
    const double eps2 = system.epsilon * system.epsilon;
    std::vector<Vector> rhs(k);
    for (int i = 0; i < k; ++i) {
        Vector mutation = Vector::Zero(system.m.size());
        for (int j = 0; j < k; ++j) {
            if (system.mutation(i, j) != 0.0) {
                mutation += system.mutation(i, j) * u[j];
            }
        }
        rhs[i] = u[i] +
                 dt * ((system.m.values() - total).cwiseProduct(u[i]) +
                       eps2 * mutation);
    }
    return rhs;
}

}  // namespace

void DiscreteTraitSystem::validate() const {
    const int k = species();
    if (k < 1) throw ConfigError("discrete.alphas: empty");
    for (int i = 0; i < k; ++i) {
        if (!(alphas[i] > 0.0)) throw ConfigError("discrete.alphas: must be positive");
        if (i > 0 && !(alphas[i] > alphas[i - 1])) {
            throw ConfigError("discrete.alphas: must be strictly increasing");
        }
    }
    if (mutation.rows() != k || mutation.cols() != k) {
        throw ConfigError("discrete.mutation: must be k x k");
    }
    for (int i = 0; i < k; ++i) {
        if (k > 1 && !(mutation(i, i) < 0.0)) {
            throw ConfigError("discrete.mutation: diagonal must be negative");
        }
        for (int j = 0; j < k; ++j) {
            if (i != j && mutation(i, j) < 0.0) {
                throw ConfigError(
                    "discrete.mutation: off-diagonal must be non-negative");
            }
        }
    }
    if (epsilon < 0.0) throw ConfigError("discrete.epsilon: must be >= 0");
}

Eigen::MatrixXd tridiagonal_mutation(int k, double spacing) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
    const double w = 1.0 / (spacing * spacing);
    for (int i = 0; i < k; ++i) {
        if (i > 0) {
            m(i, i - 1) = w;
            m(i, i) -= w;
        }
        if (i < k - 1) {
            m(i, i + 1) = w;
            m(i, i) -= w;
        }
    }
    return m;
}

DiscreteTraitSystem from_trait_grid(const TraitGrid& trait, double epsilon,
                                    const SpatialField& m) {
    DiscreteTraitSystem system{std::vector<double>(trait.cells()),
                               tridiagonal_mutation(trait.cells(),
                                                    trait.spacing()),
                               epsilon, m};
    for (int i = 0; i < trait.cells(); ++i) system.alphas[i] = trait.node(i);
    return system;
}

std::vector<SpatialField> evolve_discrete(const DiscreteTraitSystem& system,
                                          const std::vector<SpatialField>& u0,
                                          double t_end, double dt) {
    system.validate();
    const int k = system.species();
    if (static_cast<int>(u0.size()) != k) {
        throw GridMismatch("evolve_discrete: state count != species count");
    }
    double initial_mass = 0.0;
    for (const auto& f : u0) {
        if (f.grid() != system.m.grid()) {
            throw GridMismatch("evolve_discrete: state on a different grid");
        }
        if (f.min() < 0.0) {
            throw NonPositive("evolve_discrete: initial state negative");
        }
        initial_mass += f.values().sum();
    }
    if (!(initial_mass > 0.0)) {
        throw NonPositive("evolve_discrete: initial state identically zero");
    }

    auto factors = factor_steppers(system, dt);
    std::vector<Vector> u;
    u.reserve(k);
    for (const auto& f : u0) u.push_back(f.values());

    const long steps = std::lround(t_end / dt);
    for (long n = 0; n < steps; ++n) {
        auto rhs = explicit_terms(system, u, dt);
        for (int i = 0; i < k; ++i) {
            if (rhs[i].minCoeff() < 0.0) {
                throw NonPositive(
                    "evolve_discrete: dt violates the positivity contract");
            }
            u[i] = factors[i].solve(rhs[i]);
            if (!u[i].allFinite() || u[i].maxCoeff() > 1e8) {
                throw BlowUp("evolve_discrete: blow-up at species " +
                             std::to_string(i));
            }
        }
    }
    std::vector<SpatialField> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
        out.emplace_back(system.m.grid(), std::move(u[i]));
    }
    return out;
}

double discrete_residual(const DiscreteTraitSystem& system,
                         const std::vector<SpatialField>& u) {
    const LinearOperator lap = build_spatial_laplacian(system.m.grid());
    const int k = system.species();
    Vector total = Vector::Zero(system.m.size());
    for (const auto& ui : u) total += ui.values();
    const double eps2 = system.epsilon * system.epsilon;
    double worst = 0.0;
    for (int i = 0; i < k; ++i) {
        Vector mutation = Vector::Zero(system.m.size());
        for (int j = 0; j < k; ++j) {
            mutation += system.mutation(i, j) * u[j].values();
        }
        const Vector r =
            system.alphas[i] * (lap.matrix * u[i].values()) +
            (system.m.values() - total).cwiseProduct(u[i].values()) +
            eps2 * mutation;
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    return worst;
}

std::vector<SpatialField> steady_discrete(const DiscreteTraitSystem& system,
                                          double tol, double dt,
                                          double max_time) {
    system.validate();
    if (!(system.epsilon > 0.0)) {
        throw ConfigError(
            "steady_discrete: requires eps > 0 (mutation selects the unique "
            "positive equilibrium)");
    }
    const int k = system.species();
    auto factors = factor_steppers(system, dt);

    // Start from an even split of the single-species carrying profile.
    const LogisticSolution base = solve_theta(system.alphas[0], system.m);
    std::vector<Vector> u(k, base.theta.values() / k);

    const long max_steps = std::lround(max_time / dt);
    for (long n = 0; n < max_steps; ++n) {
        auto rhs = explicit_terms(system, u, dt);
        for (int i = 0; i < k; ++i) {
            if (rhs[i].minCoeff() < 0.0) {
                throw NonPositive("steady_discrete: dt violates positivity");
            }
            u[i] = factors[i].solve(rhs[i]);
            if (!u[i].allFinite() || u[i].maxCoeff() > 1e8) {
                throw BlowUp("steady_discrete: blow-up");
            }
        }
        if (n % 50 == 49) {
            std::vector<SpatialField> probe;
            probe.reserve(k);
            double sup = 0.0;
            for (int i = 0; i < k; ++i) {
                probe.emplace_back(system.m.grid(), u[i]);
                sup = std::max(sup, u[i].maxCoeff());
            }
            if (discrete_residual(system, probe) <= tol * (1.0 + sup)) {
                return probe;
            }
        }
    }
    throw NonConvergence("steady_discrete: residual target not reached by t = " +
                         std::to_string(max_time));
}

std::vector<double> species_masses(const DiscreteTraitSystem& system,
                                   const std::vector<SpatialField>& u) {
    std::vector<double> masses;
    masses.reserve(u.size());
    for (const auto& f : u) masses.push_back(integrate_spatial(f));
    return masses;
}

}  // namespace dispersal
