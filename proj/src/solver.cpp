#include "dispersal/solver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>

namespace dispersal {

namespace {

Vector tile_spatial(const Vector& f, int na) {
    const int nx = static_cast<int>(f.size());
    Vector out(static_cast<Eigen::Index>(nx) * na);
    for (int ia = 0; ia < na; ++ia) {
        out.segment(static_cast<Eigen::Index>(ia) * nx, nx) = f;
    }
    return out;
}

SpatialField trait_integral(const ModelConfig& config, const Vector& u) {
    return integrate_trait(
        StateField(config.m.grid(), config.trait, u));
}

/// Anderson-accelerated mixing on the potential update h -> g(h).
class AndersonMixer {
public:
    explicit AndersonMixer(int depth, double mixing)
        : depth_(depth), mixing_(mixing) {}

    Vector next(const Vector& h, const Vector& g) {
        const Vector f = g - h;
        history_h_.push_back(h);
        history_f_.push_back(f);
        if (static_cast<int>(history_h_.size()) > depth_ + 1) {
            history_h_.erase(history_h_.begin());
            history_f_.erase(history_f_.begin());
        }
        const int m = static_cast<int>(history_h_.size()) - 1;
        if (m < 1) {
            return h + 0.5 * f;
        }
        Eigen::MatrixXd df(f.size(), m);
        Eigen::MatrixXd dh(f.size(), m);
        for (int j = 0; j < m; ++j) {
            df.col(j) = history_f_[j + 1] - history_f_[j];
            dh.col(j) = history_h_[j + 1] - history_h_[j];
        }
        const Eigen::VectorXd gamma =
            df.colPivHouseholderQr().solve(f);
        return (h + mixing_ * f) - (dh + mixing_ * df) * gamma;
    }

    void reset() {
        history_h_.clear();
        history_f_.clear();
    }

private:
    int depth_;
    double mixing_;
    std::vector<Vector> history_h_;
    std::vector<Vector> history_f_;
};

}  // namespace

int ModelConfig::default_trait_cells(double alpha_lo, double alpha_hi,
                                     double epsilon) {
    const double layer = std::pow(epsilon, 2.0 / 3.0);
    const double needed = 8.0 * (alpha_hi - alpha_lo) / layer;
    return std::max(128, static_cast<int>(std::ceil(needed)));
}

bool ModelConfig::habitat_constant() const {
    const double spread = m.max() - m.min();
    return spread <= 1e-12 * (1.0 + std::abs(m.max()));
}

void ModelConfig::validate() const {
    if (!m.all_finite()) {
        throw ConfigError("model.m: habitat field has non-finite entries");
    }
    if (!(epsilon > 0.0)) {
        throw ConfigError("model.epsilon: must be positive");
    }
    if (habitat_constant() && !trivial_mode) {
        throw ConfigError(
            "model.m: constant habitat requires the trivial-mode flag "
            "(assumption on m: non-constant)");
    }
    if (!(steady_tol > 0.0)) {
        throw ConfigError("model.steady_tol: must be positive");
    }
    if (!(dt > 0.0)) {
        throw ConfigError("model.dt: must be positive");
    }
}

SparseMatrix assemble_diffusion_operator(const ModelConfig& config) {
    const SpatialGrid& sg = config.m.grid();
    const int nx = sg.node_count();
    const int na = config.trait.cells();
    const LinearOperator lx = build_spatial_laplacian(sg);
    const LinearOperator la = build_trait_laplacian(config.trait);
    const double eps2 = config.epsilon * config.epsilon;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nx) * na * 7);
    for (int ia = 0; ia < na; ++ia) {
        const double alpha = config.trait.node(ia);
        const Eigen::Index base = static_cast<Eigen::Index>(ia) * nx;
        for (int col = 0; col < lx.matrix.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(lx.matrix, col); it; ++it) {
                triplets.emplace_back(base + it.row(), base + it.col(),
                                      alpha * it.value());
            }
        }
    }
    for (int col = 0; col < la.matrix.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(la.matrix, col); it; ++it) {
            const Eigen::Index r = static_cast<Eigen::Index>(it.row()) * nx;
            const Eigen::Index c = static_cast<Eigen::Index>(it.col()) * nx;
            for (int ix = 0; ix < nx; ++ix) {
                triplets.emplace_back(r + ix, c + ix, eps2 * it.value());
            }
        }
    }
    SparseMatrix a(static_cast<Eigen::Index>(nx) * na,
                   static_cast<Eigen::Index>(nx) * na);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return a;
}

Vector steady_residual(const ModelConfig& config, const SparseMatrix& diffusion,
                       const StateField& u) {
    const int na = config.trait.cells();
    const SpatialField uhat = integrate_trait(u);
    const Vector reaction = tile_spatial(config.m.values() - uhat.values(), na);
    return diffusion * u.values() + reaction.cwiseProduct(u.values());
}

StateField evolve(const ModelConfig& config, const StateField& u0, double t_end,
                  double dt) {
    config.validate();
    if (u0.spatial_grid() != config.m.grid() ||
        u0.trait_grid() != config.trait) {
        throw GridMismatch("evolve: initial state on a different grid");
    }
    if (u0.min() < 0.0 || !(u0.max() > 0.0)) {
        throw NonPositive("evolve: initial state must be non-negative and "
                          "not identically zero");
    }
    const SparseMatrix diffusion = assemble_diffusion_operator(config);
    SparseMatrix stepper = -dt * diffusion;
    for (Eigen::Index i = 0; i < stepper.rows(); ++i) {
        stepper.coeffRef(i, i) += 1.0;
    }
    stepper.makeCompressed();
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    ldlt.compute(stepper);
    if (ldlt.info() != Eigen::Success) {
        throw NonConvergence("evolve: factorization of the implicit step failed");
    }

    const int nx = config.m.grid().node_count();
    const int na = config.trait.cells();
    const long steps = std::lround(t_end / dt);
    Vector u = u0.values();
    for (long n = 0; n < steps; ++n) {
        const SpatialField uhat = trait_integral(config, u);
        const Vector growth =
            Vector::Ones(static_cast<Eigen::Index>(nx) * na) +
            dt * tile_spatial(config.m.values() - uhat.values(), na);
        if (growth.minCoeff() < 0.0) {
            throw NonPositive(
                "evolve: dt violates the positivity contract "
                "(dt * max(uhat - m) >= 1)");
        }
        u = ldlt.solve(growth.cwiseProduct(u));
        const double sup = u.maxCoeff();
        if (!u.allFinite() || sup > 1e8) {
            throw BlowUp("evolve: sup-norm exceeded 1e8 at t = " +
                         std::to_string((n + 1) * dt));
        }
        if (u.minCoeff() < 0.0) {
            throw NonPositive("evolve: positivity lost at t = " +
                              std::to_string((n + 1) * dt));
        }
    }
    return StateField(config.m.grid(), config.trait, std::move(u));
}

StateField evolve_until_steady(const ModelConfig& config, const StateField& u0,
                               double dt, double max_time) {
    config.validate();
    const SparseMatrix diffusion = assemble_diffusion_operator(config);
    SparseMatrix stepper = -dt * diffusion;
    for (Eigen::Index i = 0; i < stepper.rows(); ++i) {
        stepper.coeffRef(i, i) += 1.0;
    }
    stepper.makeCompressed();
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    ldlt.compute(stepper);
    if (ldlt.info() != Eigen::Success) {
        throw NonConvergence(
            "evolve_until_steady: factorization of the implicit step failed");
    }
    const int nx = config.m.grid().node_count();
    const int na = config.trait.cells();
    const long max_steps = std::lround(max_time / dt);
    Vector u = u0.values();
    for (long n = 0; n < max_steps; ++n) {
        const SpatialField uhat = trait_integral(config, u);
        const Vector growth =
            Vector::Ones(static_cast<Eigen::Index>(nx) * na) +
            dt * tile_spatial(config.m.values() - uhat.values(), na);
        if (growth.minCoeff() < 0.0) {
            throw NonPositive("evolve_until_steady: dt violates positivity");
        }
        u = ldlt.solve(growth.cwiseProduct(u));
        if (!u.allFinite() || u.maxCoeff() > 1e8) {
            throw BlowUp("evolve_until_steady: blow-up");
        }
        if (n % 25 == 24) {
            StateField candidate(config.m.grid(), config.trait, u);
            const double rinf = steady_residual(config, diffusion, candidate)
                                    .cwiseAbs()
                                    .maxCoeff();
            if (rinf <= config.steady_tol * (1.0 + u.maxCoeff())) {
                return candidate;
            }
        }
    }
    throw NonConvergence(
        "evolve_until_steady: residual target not reached by t = " +
        std::to_string(max_time));
}

double existence_mu1(const ModelConfig& config) {
    const SparseMatrix diffusion = assemble_diffusion_operator(config);
    const int na = config.trait.cells();
    SparseMatrix b = -diffusion;
    const Vector pot = tile_spatial(-config.m.values(), na);
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
        b.coeffRef(i, i) += pot[i];
    }
    b.makeCompressed();
    EigenSolveOptions opts;
    opts.positive = false;
    return smallest_eigenpair(b, nullptr, opts).lambda;
}

SteadyState solve_steady_state(const ModelConfig& config,
                               const StateField* initial_guess) {
    config.validate();
    const double mu1 = existence_mu1(config);
    if (mu1 >= 0.0) {
        throw NonExistence(
            "solve_steady_state: principal eigenvalue mu1 = " +
            std::to_string(mu1) +
            " is non-negative, no positive steady state exists");
    }

    const SpatialGrid& sg = config.m.grid();
    const int nx = sg.node_count();
    const int na = config.trait.cells();
    const double da = config.trait.spacing();
    const double cell = sg.cell_volume();
    const SparseMatrix diffusion = assemble_diffusion_operator(config);

    // Start from the small-mutation limit of the potential: h = theta - m.
    Vector h;
    Vector eigvec_guess;
    if (initial_guess != nullptr) {
        StateField guess = *initial_guess;
        const SpatialField uhat0 = integrate_trait(guess);
        h = uhat0.values() - config.m.values();
        eigvec_guess = guess.values();
    } else {
        const LogisticSolution theta =
            solve_theta(config.trait.alpha_lo(), config.m);
        h = theta.theta.values() - config.m.values();
    }

    AndersonMixer mixer(5, 0.9);
    EigenSolveOptions inner;
    inner.positive = false;
    inner.rel_tol = 1e-10;

    Vector phi;
    double lambda = 0.0;
    double rinf = std::numeric_limits<double>::infinity();
    double best_rinf = rinf;
    int stalled = 0;
    int iterations = 0;

    auto eigen_for_potential = [&](const Vector& pot,
                                   const EigenSolveOptions& opts) {
        SparseMatrix a = -diffusion;
        const Vector tiled = tile_spatial(pot, na);
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            a.coeffRef(i, i) += tiled[i];
        }
        a.makeCompressed();
        const Vector* warm =
            (phi.size() == a.rows()) ? &phi
            : (eigvec_guess.size() == a.rows()) ? &eigvec_guess
                                                : nullptr;
        return smallest_eigenpair(a, warm, opts);
    };

    for (int outer = 0; outer < config.max_outer; ++outer) {
        ++iterations;
        PrincipalPair pair = eigen_for_potential(h, inner);
        phi = pair.vec;
        lambda = pair.lambda;

        StateField phi_state(sg, config.trait, phi);
        const SpatialField phi_hat = integrate_trait(phi_state);
        // Mass-identity scaling: integral of (m - c phi_hat) c phi over the
        // product domain vanishes.
        double m_phi = 0.0;
        for (int ia = 0; ia < na; ++ia) {
            m_phi += config.m.values().dot(
                phi.segment(static_cast<Eigen::Index>(ia) * nx, nx));
        }
        m_phi *= da * cell;
        const double phihat_sq = cell * phi_hat.values().squaredNorm();
        const double c = m_phi / phihat_sq;
        if (!(c > 0.0)) {
            throw NonConvergence(
                "solve_steady_state: mass scaling turned non-positive");
        }

        StateField u(sg, config.trait, c * phi);
        rinf = steady_residual(config, diffusion, u).cwiseAbs().maxCoeff();
        const double target = config.steady_tol * (1.0 + u.max());
        if (rinf <= target) {
            // Positivity-restoring eigen solve at the converged potential.
            EigenSolveOptions final_opts;
            final_opts.positive = true;
            final_opts.rel_tol = 1e-10;
            PrincipalPair final_pair = eigen_for_potential(h, final_opts);
            phi = final_pair.vec;
            StateField phi_fin(sg, config.trait, phi);
            const SpatialField hat_fin = integrate_trait(phi_fin);
            double m_phi_fin = 0.0;
            for (int ia = 0; ia < na; ++ia) {
                m_phi_fin += config.m.values().dot(
                    phi.segment(static_cast<Eigen::Index>(ia) * nx, nx));
            }
            m_phi_fin *= da * cell;
            const double c_fin =
                m_phi_fin / (cell * hat_fin.values().squaredNorm());
            StateField u_fin(sg, config.trait, c_fin * phi);
            const double rfin = steady_residual(config, diffusion, u_fin)
                                    .cwiseAbs()
                                    .maxCoeff();
            SteadyState state{std::move(u_fin),
                              integrate_trait(StateField(sg, config.trait,
                                                         c_fin * phi)),
                              integrate_trait_weighted(StateField(
                                  sg, config.trait, c_fin * phi)),
                              rfin,
                              iterations,
                              config.epsilon,
                              mu1};
            const auto violations = state.check_invariants(config);
            if (!violations.empty()) {
                std::string msg = "solve_steady_state: invariant violation:";
                for (const auto& v : violations) msg += "\n  " + v;
                throw InvariantViolation(msg);
            }
            return state;
        }

        const Vector g = c * phi_hat.values() - config.m.values();
        h = mixer.next(h, g);

        if (rinf < 0.5 * best_rinf) {
            best_rinf = rinf;
            stalled = 0;
        } else if (++stalled >= 12) {
            // Contract toward the fixed point with the time stepper, then
            // resume the accelerated iteration.
            StateField burst = u;
            const double dt = std::min(config.dt,
                                       0.8 / std::max(1.0, u.max()));
            SparseMatrix stepper = -dt * diffusion;
            for (Eigen::Index i = 0; i < stepper.rows(); ++i) {
                stepper.coeffRef(i, i) += 1.0;
            }
            stepper.makeCompressed();
            Eigen::SimplicialLDLT<SparseMatrix> ldlt;
            ldlt.compute(stepper);
            Vector w = burst.values();
            for (int k = 0; k < 200; ++k) {
                const SpatialField uhat = trait_integral(config, w);
                const Vector growth =
                    Vector::Ones(w.size()) +
                    dt * tile_spatial(config.m.values() - uhat.values(), na);
                w = ldlt.solve(growth.cwiseProduct(w.cwiseMax(0.0)));
            }
            StateField relaxed(sg, config.trait, w);
            h = integrate_trait(relaxed).values() - config.m.values();
            phi = w;
            mixer.reset();
            stalled = 0;
        }
    }
    throw NonConvergence("solve_steady_state: residual " +
                         std::to_string(rinf) + " after " +
                         std::to_string(iterations) + " outer iterations");
}

StateField rescale_state(const SteadyState& previous, const ModelConfig& next) {
    const SpatialGrid& sg = next.m.grid();
    if (previous.u.spatial_grid() != sg) {
        throw GridMismatch("rescale_state: spatial grids differ");
    }
    const TraitGrid& told = previous.u.trait_grid();
    const TraitGrid& tnew = next.trait;
    const double ratio = std::pow(previous.epsilon / next.epsilon, 2.0 / 3.0);
    const int nx = sg.node_count();
    StateField out(sg, tnew, 0.0);
    for (int ia = 0; ia < tnew.cells(); ++ia) {
        // Preserve the layer variable s = (alpha - alpha_lo) / eps^(2/3).
        const double alpha_old =
            told.alpha_lo() + (tnew.node(ia) - tnew.alpha_lo()) * ratio;
        const double pos =
            (alpha_old - told.alpha_lo()) / told.spacing() - 0.5;
        const int j0 = std::clamp(static_cast<int>(std::floor(pos)), 0,
                                  told.cells() - 1);
        const int j1 = std::min(j0 + 1, told.cells() - 1);
        const double w = std::clamp(pos - j0, 0.0, 1.0);
        for (int ix = 0; ix < nx; ++ix) {
            out(ix, ia) = ratio * ((1.0 - w) * previous.u(ix, j0) +
                                   w * previous.u(ix, j1));
        }
    }
    return out;
}

std::vector<std::string> SteadyState::check_invariants(
    const ModelConfig& config, unsigned seed) const {
    std::vector<std::string> out;
    auto fail = [&out](const std::string& msg) { out.push_back(msg); };

    if (!u.all_finite()) fail("state has non-finite entries");
    if (!(u.min() > 0.0)) {
        fail("state is not strictly positive (min = " +
             std::to_string(u.min()) + ")");
    }

    const double alo = u.trait_grid().alpha_lo();
    const double ahi = u.trait_grid().alpha_hi();
    const double slack = 1e-12 * (1.0 + v.max());
    for (int i = 0; i < u_hat.size(); ++i) {
        if (v[i] < alo * u_hat[i] - slack || v[i] > ahi * u_hat[i] + slack) {
            fail("trait-weighted integral escapes [alpha_lo uhat, alpha_hi "
                 "uhat] at node " +
                 std::to_string(i));
            break;
        }
    }

    const Vector& mvals = config.m.values();
    const double mass_balance = integrate_spatial(SpatialField(
        u_hat.grid(), u_hat.values().cwiseProduct(mvals - u_hat.values())));
    if (std::abs(mass_balance) > 1e-8) {
        fail("integral of uhat (m - uhat) = " + std::to_string(mass_balance) +
             " exceeds 1e-8");
    }

    const double excess = integrate_spatial(
        SpatialField(u_hat.grid(), u_hat.values() - mvals));
    if (config.trivial_mode) {
        if (std::abs(excess) > 1e-8) {
            fail("trivial mode: integral of (uhat - m) = " +
                 std::to_string(excess));
        }
    } else if (!(excess > 0.0)) {
        fail("integral of (uhat - m) = " + std::to_string(excess) +
             " is not positive");
    }

    const double bound = (ahi / alo) * config.m.max() + 1e-3;
    if (u_hat.max() > bound) {
        fail("max uhat = " + std::to_string(u_hat.max()) +
             " exceeds (ahi/alo) max m + 1e-3 = " + std::to_string(bound));
    }

    // Integrated steady equation: Lap v + (m - uhat) uhat = 0 up to the
    // trait-integrated residual.
    const LinearOperator lap = build_spatial_laplacian(u_hat.grid());
    const Vector v_residual =
        lap.matrix * v.values() +
        u_hat.values().cwiseProduct(mvals - u_hat.values());
    const double v_tol =
        std::max(1e-8, 2.0 * (ahi - alo) * residual_inf);
    if (v_residual.cwiseAbs().maxCoeff() > v_tol) {
        fail("residual of the trait-integrated equation " +
             std::to_string(v_residual.cwiseAbs().maxCoeff()) + " exceeds " +
             std::to_string(v_tol));
    }

    // Self-consistency: u is a zero-eigenvalue eigenfunction of the frozen
    // operator, so its Rayleigh quotient under the steady potential is zero.
    const SparseMatrix diffusion = assemble_diffusion_operator(config);
    const int na = config.trait.cells();
    const Vector hu = [&] {
        Vector pot(u.values().size());
        const Vector hvals = u_hat.values() - mvals;
        const int nx = u_hat.size();
        for (int ia = 0; ia < na; ++ia) {
            pot.segment(static_cast<Eigen::Index>(ia) * nx, nx) = hvals;
        }
        return pot;
    }();
    const double quad =
        (-u.values().dot(diffusion * u.values()) +
         u.values().cwiseAbs2().dot(hu)) /
        u.values().squaredNorm();
    if (std::abs(quad) > 1e-6) {
        fail("steady-state Rayleigh quotient " + std::to_string(quad) +
             " exceeds 1e-6");
    }

    // Randomized probes of the variational lower bound: the quotient of any
    // test vector must dominate the quotient of u itself.
    std::mt19937 rng(seed + 1234567u);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int probe = 0; probe < 5; ++probe) {
        Vector z(u.values().size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
        const double q =
            (-z.dot(diffusion * z) + z.cwiseAbs2().dot(hu)) / z.squaredNorm();
        if (q < quad - 1e-9 * (1.0 + std::abs(q))) {
            fail("random test vector beats the steady state in the "
                 "variational quotient");
            break;
        }
    }
    return out;
}

}  // namespace dispersal
