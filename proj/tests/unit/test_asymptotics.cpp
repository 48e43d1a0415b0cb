#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dispersal/asymptotics.hpp"

using namespace dispersal;

namespace {
constexpr double kPi = 3.14159265358979323846;

SpatialField cosine_habitat(const SpatialGrid& grid) {
    Vector v(grid.node_count());
    for (int i = 0; i < grid.node_count(); ++i) {
        v[i] = 1.0 + 0.5 * std::cos(kPi * grid.coordinate(i, 0));
    }
    return SpatialField(grid, std::move(v));
}

ModelConfig desk_config(const SpatialField& m, double epsilon,
                        int trait_cells) {
    return ModelConfig{m, TraitGrid(0.5, 2.0, trait_cells), epsilon, 1e-9,
                       0.4, false, 400};
}

SteadyState state_around(const StateField& u, double epsilon) {
    return SteadyState{u,
                       integrate_trait(u),
                       integrate_trait_weighted(u),
                       0.0,
                       0,
                       epsilon,
                       -1.0};
}
}  // namespace

TEST_CASE("theory profile composition") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 96);
    const SpatialField m = cosine_habitat(g);
    ModelConfig config = desk_config(m, 0.05, 128);
    const TheoryProfile theory = build_theory_profile(m, config);

    CHECK(theory.sigma1_star > 0.0);
    CHECK(theory.theta.theta.max() - theory.theta.theta.min() > 1e-3);
    CHECK(theory.eta.ode_residual_inf() < 1e-6);

    SUBCASE("trait integral of the prediction recovers theta under refinement") {
        for (int cells : {256, 2048}) {
            const TraitGrid trait(0.5, 2.0, cells);
            const StateField predicted = theory.materialize(trait, 0.05);
            const SpatialField uhat = integrate_trait(predicted);
            const double err =
                (uhat.values() - theory.theta.theta.values())
                    .cwiseAbs()
                    .maxCoeff();
            if (cells == 256) {
                CHECK(err < 0.02);
            } else {
                CHECK(err < 0.005);
            }
        }
    }

    SUBCASE("doubling the habitat rebuilds a consistent profile") {
        const SpatialField m2(g, 2.0 * m.values());
        const TheoryProfile doubled = build_theory_profile(m2, config);
        CHECK(doubled.sigma1_star > theory.sigma1_star);
        CHECK(doubled.eta.ode_residual_inf() < 1e-6);
        CHECK(std::abs(doubled.eta.eval_prime(0.0)) < 1e-8);
    }

    SUBCASE("constant habitat is rejected: no selection gradient") {
        const SpatialField ones(g, 1.0);
        CHECK_THROWS_AS(build_theory_profile(ones, config), InvalidA1);
    }
}

TEST_CASE("profile error on the exact prediction vanishes") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 48);
    const SpatialField m = cosine_habitat(g);
    ModelConfig config = desk_config(m, 0.02, 163);
    const TheoryProfile theory = build_theory_profile(m, config);
    const StateField predicted = theory.materialize(config.trait, 0.02);
    const SteadyState state = state_around(predicted, 0.02);
    CHECK(profile_error(state, theory) == 0.0);

    SUBCASE("uhat error equals the trait quadrature truncation") {
        CHECK(uhat_error(state, theory.theta) < 2e-2);
    }

    SUBCASE("grid mismatch is detected") {
        const SpatialGrid other = SpatialGrid::interval(1.0, 64);
        ModelConfig config2 = desk_config(cosine_habitat(other), 0.02, 163);
        const TheoryProfile theory2 = build_theory_profile(
            cosine_habitat(other), config2);
        CHECK_THROWS_AS(profile_error(state, theory2), GridMismatch);
        CHECK_THROWS_AS(uhat_error(state, theory2.theta), GridMismatch);
    }
}

TEST_CASE("tail decay fit") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 48);
    const SpatialField m = cosine_habitat(g);
    ModelConfig config = desk_config(m, 0.02, 320);
    TheoryProfile theory = build_theory_profile(m, config);
    // Use a unit-gradient profile so the fit window sees real Airy decay.
    theory.sigma1_star = 1.0;
    theory.eta = build_eta_star(1.0);
    const StateField predicted = theory.materialize(config.trait, 0.02);
    const SteadyState state = state_around(predicted, 0.02);

    const double beta = tail_decay_fit(state);
    CHECK(beta > 0.0);

    SUBCASE("matches the same fit applied to the known profile") {
        const double layer = std::pow(0.02, 2.0 / 3.0);
        std::vector<double> s, logeta;
        const double sup = state.u.max();
        for (int ia = 0; ia < config.trait.cells(); ++ia) {
            const double si =
                (config.trait.node(ia) - config.trait.alpha_lo()) / layer;
            double g_max = 0.0;
            for (int ix = 0; ix < g.node_count(); ++ix) {
                g_max = std::max(g_max, state.u(ix, ia));
            }
            if (g_max >= 1e-12 * sup && si >= 1.0) {
                s.push_back(si);
                logeta.push_back(std::log(theory.theta.theta.max() *
                                          theory.eta.eval(si) / layer));
            }
        }
        double sx = 0, sy = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            sx += s[i];
            sy += logeta[i];
        }
        const double mx = sx / s.size(), my = sy / s.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            sxx += (s[i] - mx) * (s[i] - mx);
            sxy += (s[i] - mx) * (logeta[i] - my);
        }
        const double oracle_beta = -sxy / sxx;
        CHECK(beta == doctest::Approx(oracle_beta).epsilon(1e-6));
    }

    SUBCASE("unresolved tail raises InsufficientTail") {
        ModelConfig coarse = desk_config(m, 0.02, 8);
        const StateField tiny = theory.materialize(coarse.trait, 0.02);
        const SteadyState bad = state_around(tiny, 0.02);
        CHECK_THROWS_AS(tail_decay_fit(bad, 1.0, 2.0), InsufficientTail);
    }

    SUBCASE("stable under trait refinement") {
        ModelConfig fine = desk_config(m, 0.02, 640);
        const StateField refined = theory.materialize(fine.trait, 0.02);
        const double beta_fine =
            tail_decay_fit(state_around(refined, 0.02));
        CHECK(std::abs(beta_fine - beta) / beta < 0.2);
    }
}

TEST_CASE("concentration mass") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 48);
    const SpatialField m = cosine_habitat(g);
    ModelConfig config = desk_config(m, 0.01, 259);
    const TheoryProfile theory = build_theory_profile(m, config);
    const double k99 = theory.eta.quantile(0.99);

    const StateField predicted = theory.materialize(config.trait, 0.01);
    const SteadyState state = state_around(predicted, 0.01);
    CHECK(concentration_mass(state, k99) == doctest::Approx(0.99).epsilon(5e-3));
    CHECK(concentration_mass(state, 0.0) == 0.0);

    SUBCASE("fraction grows toward one as epsilon decreases at fixed K") {
        double prev = 0.0;
        for (double eps : {0.08, 0.04, 0.02}) {
            const int cells = ModelConfig::default_trait_cells(0.5, 2.0, eps);
            const TraitGrid trait(0.5, 2.0, cells);
            const StateField p = theory.materialize(trait, eps);
            const double frac =
                concentration_mass(state_around(p, eps), k99);
            CHECK(frac >= prev - 1e-12);
            prev = frac;
        }
    }
}

TEST_CASE("scaling fits on synthetic power-law records") {
    std::vector<SweepRecord> records;
    const double c0 = 0.11, cs = 0.24;
    for (double eps : {0.08, 0.04, 0.02, 0.01}) {
        SweepRecord r;
        r.epsilon = eps;
        r.sigma0 = -c0 * std::pow(eps, 2.0 / 3.0);
        r.sup_u = cs * std::pow(eps, -2.0 / 3.0);
        records.push_back(r);
    }
    const ScalingFits fits = scaling_fits(records, 0.0345);
    CHECK(fits.sigma0_slope.slope == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(fits.supu_slope.slope == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
    CHECK(fits.sigma0_slope.ci_halfwidth < 1e-10);
    CHECK(fits.ratio_at_min_eps == doctest::Approx(c0).epsilon(1e-12));
    CHECK(fits.ratio_limit ==
          doctest::Approx(std::pow(0.0345, 2.0 / 3.0) * 1.0187929716)
              .epsilon(1e-8));

    SUBCASE("insufficient data is rejected") {
        std::vector<SweepRecord> three(records.begin(), records.begin() + 3);
        CHECK_THROWS_AS(scaling_fits(three, 0.03), InsufficientData);

        std::vector<SweepRecord> narrow = records;
        narrow.erase(narrow.begin());  // spans only a factor of four
        CHECK_THROWS_AS(scaling_fits(narrow, 0.03), InsufficientData);

        std::vector<SweepRecord> wrong_sign = records;
        wrong_sign[1].sigma0 = 1e-3;
        CHECK_THROWS_AS(scaling_fits(wrong_sign, 0.03), InsufficientData);
    }
}

TEST_CASE("micro sweep end to end") {
    // Structural smoke test at deliberately coarse resolution; the
    // quantitative windows live in the acceptance suite.
    const SpatialGrid g = SpatialGrid::interval(1.0, 48);
    SweepConfig config{cosine_habitat(g), 0.5, 2.0,
                       {0.4, 0.2, 0.1, 0.05}, 1e-9, 0.4, 64, true};
    const SweepReport report = run_sweep(config);

    REQUIRE(report.records.size() == 4);
    REQUIRE(report.states.size() == 4);
    for (std::size_t i = 1; i < report.records.size(); ++i) {
        CHECK(report.records[i].epsilon < report.records[i - 1].epsilon);
    }
    for (const auto& r : report.records) {
        CHECK(r.residual_inf <= 1e-9 * (1.0 + r.sup_u));
        CHECK(r.sigma0 < 0.0);
        CHECK(r.sigma1 > 0.0);
        CHECK(r.beta_hat > 0.0);
        CHECK(r.mass_frac > 0.0);
        CHECK(r.mass_frac <= 1.0 + 1e-12);
        CHECK(r.mu1 < 0.0);
    }
    CHECK(report.sigma1_star > 0.0);
    CHECK(report.concentration_k > 0.0);
    // sigma_{1,eps} approaches sigma1* along the sweep
    const auto& recs = report.records;
    CHECK(std::abs(recs.back().sigma1 - report.sigma1_star) <
          std::abs(recs.front().sigma1 - report.sigma1_star));
    // h_eps stays non-constant: the potential spread survives the limit
    const SpatialField& uhat = report.states.back().u_hat;
    Vector h = uhat.values() - config.m.values();
    CHECK(h.maxCoeff() - h.minCoeff() > 1e-3);
}
