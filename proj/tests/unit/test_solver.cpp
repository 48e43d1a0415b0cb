#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dispersal/solver.hpp"

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

ModelConfig desk_config(int nx, double epsilon, int trait_cells = 0,
                        bool trivial = false) {
    const SpatialGrid g = SpatialGrid::interval(1.0, nx);
    const SpatialField m = trivial ? SpatialField(g, 1.0) : cosine_habitat(g);
    const int cells = trait_cells > 0
                          ? trait_cells
                          : ModelConfig::default_trait_cells(0.5, 2.0, epsilon);
    return ModelConfig{m, TraitGrid(0.5, 2.0, cells), epsilon, 1e-9, 0.4,
                       trivial, 400};
}
}  // namespace

TEST_CASE("config validation") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 32);
    ModelConfig bad{SpatialField(g, 1.0), TraitGrid(0.5, 2.0, 16), 0.05,
                    1e-9, 0.4, false, 400};
    CHECK_THROWS_AS(bad.validate(), ConfigError);  // constant m without flag
    bad.trivial_mode = true;
    CHECK_NOTHROW(bad.validate());
    bad.epsilon = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    CHECK(ModelConfig::default_trait_cells(0.5, 2.0, 0.08) == 128);
    CHECK(ModelConfig::default_trait_cells(0.5, 2.0, 0.01) == 259);
}

TEST_CASE("trivial habitat: constant steady state and stationary evolution") {
    ModelConfig config = desk_config(48, 0.05, 96, true);
    const double expected = 1.0 / config.trait.width();

    const SteadyState steady = solve_steady_state(config);
    CHECK((steady.u.values().array() - expected).abs().maxCoeff() < 1e-8);
    CHECK(steady.mu1 == doctest::Approx(-1.0).epsilon(1e-8));

    const StateField u0(config.m.grid(), config.trait, expected);
    const StateField ut = evolve(config, u0, 5.0, 0.1);
    CHECK((ut.values() - u0.values()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("trait-constant decay follows the scalar logistic mass law") {
    ModelConfig config = desk_config(48, 0.05, 96, true);
    const double carrying = 1.0 / config.trait.width();
    const double dt = 0.01;
    const StateField u0(config.m.grid(), config.trait, 2.0 * carrying);
    const double t_end = 3.0;
    const StateField ut = evolve(config, u0, t_end, dt);

    // Total mass follows dM/dt = M (1 - M) from M(0) = 2 in closed form.
    const double m0 = 2.0;
    const double exact = m0 * std::exp(t_end) / (1.0 + m0 * (std::exp(t_end) - 1.0));
    const double mass = integrate_state(ut);
    CHECK(std::abs(mass - exact) < 10.0 * dt);

    // and it decays monotonically toward the carrying state
    CHECK(mass > 1.0);
    CHECK(mass < m0);
    CHECK((ut.values().array() - carrying).abs().maxCoeff() <
          (m0 - 1.0) * std::exp(-0.9 * t_end) + 10.0 * dt);
}

TEST_CASE("per-step mass identity of the splitting") {
    ModelConfig config = desk_config(48, 0.08, 96);
    const StateField u0(config.m.grid(), config.trait,
                        1.0 / config.trait.width());
    const double dt = 0.2;
    StateField u = u0;
    for (int step = 0; step < 5; ++step) {
        const StateField next = evolve(config, u, dt, dt);
        const SpatialField uhat = integrate_trait(u);
        const double reaction = integrate_spatial(SpatialField(
            uhat.grid(),
            uhat.values().cwiseProduct(config.m.values() - uhat.values())));
        const double dm = (integrate_state(next) - integrate_state(u)) / dt;
        CHECK(std::abs(dm - reaction) < 1e-10 * (1.0 + std::abs(reaction)));
        u = next;
    }
}

TEST_CASE("evolution guards") {
    ModelConfig config = desk_config(48, 0.05, 96);
    const StateField u0(config.m.grid(), config.trait, 10.0);
    // dt * max(uhat - m) >= 1 trips the positivity contract
    CHECK_THROWS_AS(evolve(config, u0, 1.0, 0.2), NonPositive);

    const StateField zero(config.m.grid(), config.trait, 0.0);
    CHECK_THROWS_AS(evolve(config, zero, 1.0, 0.05), NonPositive);
}

TEST_CASE("steady state at desk scale: identities and invariants") {
    ModelConfig config = desk_config(96, 0.05);
    const SteadyState steady = solve_steady_state(config);

    CHECK(steady.residual_inf <= config.steady_tol * (1.0 + steady.u.max()));
    CHECK(steady.u.min() > 0.0);
    CHECK(steady.check_invariants(config).empty());

    const double balance = integrate_spatial(SpatialField(
        steady.u_hat.grid(),
        steady.u_hat.values().cwiseProduct(config.m.values() -
                                           steady.u_hat.values())));
    CHECK(std::abs(balance) < 1e-8);

    const double excess = integrate_spatial(SpatialField(
        steady.u_hat.grid(), steady.u_hat.values() - config.m.values()));
    CHECK(excess > 0.0);

    for (int i = 0; i < steady.u_hat.size(); ++i) {
        CHECK(steady.v[i] >= 0.5 * steady.u_hat[i] - 1e-12);
        CHECK(steady.v[i] <= 2.0 * steady.u_hat[i] + 1e-12);
    }
    CHECK(steady.u_hat.max() <= (2.0 / 0.5) * config.m.max() + 1e-3);
}

TEST_CASE("steady state is independent of the initial guess") {
    ModelConfig config = desk_config(64, 0.08, 128);
    const SteadyState cold = solve_steady_state(config);

    const StateField uniform(config.m.grid(), config.trait,
                             1.0 / config.trait.width());
    const SteadyState warm = solve_steady_state(config, &uniform);
    CHECK((cold.u.values() - warm.u.values()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("long-time evolution reaches the same fixed point") {
    ModelConfig config = desk_config(64, 0.08, 128);
    const SteadyState steady = solve_steady_state(config);
    const StateField u0(config.m.grid(), config.trait,
                        1.0 / config.trait.width());
    const StateField relaxed = evolve_until_steady(config, u0, 0.4, 5e3);
    CHECK((relaxed.values() - steady.u.values()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("existence criterion") {
    SUBCASE("constant habitat: mu1 = -1") {
        ModelConfig config = desk_config(48, 0.05, 96, true);
        CHECK(existence_mu1(config) == doctest::Approx(-1.0).epsilon(1e-9));
    }

    SUBCASE("default habitat: mu1 below minus the mean of m") {
        ModelConfig config = desk_config(64, 0.05, 96);
        const double mean_m =
            integrate_spatial(config.m) / config.m.grid().volume();
        CHECK(existence_mu1(config) <= -mean_m);
    }

    SUBCASE("strongly negative habitat: no positive steady state") {
        const SpatialGrid g = SpatialGrid::interval(1.0, 48);
        Vector mv(g.node_count());
        for (int i = 0; i < g.node_count(); ++i) {
            mv[i] = -2.0 + std::cos(kPi * g.coordinate(i, 0));
        }
        ModelConfig config{SpatialField(g, mv), TraitGrid(0.5, 2.0, 96),
                           0.05, 1e-9, 0.4, false, 400};
        CHECK(existence_mu1(config) > 0.0);
        CHECK_THROWS_AS(solve_steady_state(config), NonExistence);
    }
}

TEST_CASE("continuation rescaling preserves the layer variable") {
    ModelConfig coarse = desk_config(48, 0.08, 128);
    const SteadyState big = solve_steady_state(coarse);
    ModelConfig fine = desk_config(48, 0.04, 0);
    const StateField guess = rescale_state(big, fine);
    CHECK(guess.min() >= 0.0);
    CHECK(guess.all_finite());
    // the rescaled guess should be close enough for the solver to home in
    const SteadyState refined = solve_steady_state(fine, &guess);
    CHECK(refined.residual_inf <= fine.steady_tol * (1.0 + refined.u.max()));
}
