#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dispersal/discrete.hpp"
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
}  // namespace

TEST_CASE("system validation") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 32);
    const SpatialField m = cosine_habitat(g);
    DiscreteTraitSystem bad{{1.0, 0.5}, tridiagonal_mutation(2, 0.75), 0.1, m};
    CHECK_THROWS_AS(bad.validate(), ConfigError);  // not increasing

    Eigen::MatrixXd wrong = tridiagonal_mutation(2, 0.75);
    wrong(0, 1) = -1.0;
    DiscreteTraitSystem neg{{0.5, 2.0}, wrong, 0.1, m};
    CHECK_THROWS_AS(neg.validate(), ConfigError);

    DiscreteTraitSystem ok{{0.5, 2.0}, tridiagonal_mutation(2, 0.75), 0.1, m};
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("mutation matrix structure") {
    const Eigen::MatrixXd m = tridiagonal_mutation(5, 0.3);
    // column sums vanish: mutation conserves mass
    for (int j = 0; j < 5; ++j) {
        CHECK(std::abs(m.col(j).sum()) < 1e-12);
    }
    for (int i = 0; i < 5; ++i) {
        CHECK(m(i, i) < 0.0);
        for (int j = 0; j < 5; ++j) {
            if (i != j) CHECK(m(i, j) >= 0.0);
        }
    }
}

TEST_CASE("single species reduces to the logistic equation") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 64);
    const SpatialField m = cosine_habitat(g);
    const LogisticSolution theta = solve_theta(0.7, m);

    DiscreteTraitSystem system{{0.7}, Eigen::MatrixXd::Zero(1, 1), 0.0, m};
    const std::vector<SpatialField> u0{SpatialField(g, 0.5 * theta.theta.values())};
    const auto u = evolve_discrete(system, u0, 300.0, 0.05);
    CHECK((u[0].values() - theta.theta.values()).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("mass identity along a trajectory") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 48);
    const SpatialField m = cosine_habitat(g);
    DiscreteTraitSystem system = from_trait_grid(TraitGrid(0.5, 2.0, 3), 0.2, m);
    const LogisticSolution theta = solve_theta(0.5, m);
    std::vector<SpatialField> u(3, SpatialField(g, theta.theta.values() / 3));

    const double dt = 0.02;
    for (int step = 0; step < 10; ++step) {
        const auto next = evolve_discrete(system, u, dt, dt);
        Vector total = Vector::Zero(g.node_count());
        for (const auto& ui : u) total += ui.values();
        // with zero column sums the mutation term drops out of the total
        const double reaction = integrate_spatial(SpatialField(
            g, total.cwiseProduct(m.values() - total)));
        double dm = 0.0;
        for (int i = 0; i < 3; ++i) {
            dm += integrate_spatial(next[i]) - integrate_spatial(u[i]);
        }
        CHECK(std::abs(dm / dt - reaction) < 1e-9 * (1.0 + std::abs(reaction)));
        u = next;
    }
}

TEST_CASE("two species without mutation: the slow diffuser takes over") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 64);
    const SpatialField m = cosine_habitat(g);
    const LogisticSolution theta_slow = solve_theta(0.5, m);
    const LogisticSolution theta_fast = solve_theta(2.0, m);

    DiscreteTraitSystem system{{0.5, 2.0}, tridiagonal_mutation(2, 0.75),
                               0.0, m};
    std::vector<SpatialField> u0{
        SpatialField(g, 0.01 * theta_fast.theta.values()),
        SpatialField(g, theta_fast.theta.values())};
    const auto u = evolve_discrete(system, u0, 800.0, 0.05);
    const auto masses = species_masses(system, u);
    const double fast_fraction = masses[1] / (masses[0] + masses[1]);
    CHECK(fast_fraction < 0.01);
    CHECK((u[0].values() - theta_slow.theta.values()).cwiseAbs().maxCoeff() <
          0.05);
}

TEST_CASE("constant habitat with symmetric mutation equalizes the species") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 32);
    const SpatialField m(g, 1.0);
    DiscreteTraitSystem system = from_trait_grid(TraitGrid(0.5, 2.0, 3), 0.3, m);
    const auto u = steady_discrete(system, 1e-10);
    const auto masses = species_masses(system, u);
    for (int i = 0; i < 3; ++i) {
        CHECK(masses[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-7));
        CHECK(u[i].max() - u[i].min() < 1e-8);
    }
}

TEST_CASE("mutation selects the slowest diffuser, more strongly as eps drops") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 64);
    const SpatialField m = cosine_habitat(g);
    double previous_fraction = 0.0;
    for (double eps : {0.2, 0.1, 0.05}) {
        DiscreteTraitSystem system{{0.5, 1.0, 2.0},
                                   tridiagonal_mutation(3, 0.5), eps, m};
        const auto u = steady_discrete(system, 1e-9);
        const auto masses = species_masses(system, u);
        const double total = masses[0] + masses[1] + masses[2];
        const double fraction = masses[0] / total;
        CHECK(fraction > previous_fraction);
        previous_fraction = fraction;
        for (const auto& ui : u) CHECK(ui.min() > 0.0);
    }
    CHECK(previous_fraction > 0.75);
}

TEST_CASE("k-bin system agrees with the continuum solver on the same grid") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 48);
    const SpatialField m = cosine_habitat(g);
    const TraitGrid trait(0.5, 2.0, 8);
    const double eps = 0.3;

    DiscreteTraitSystem system = from_trait_grid(trait, eps, m);
    const auto species = steady_discrete(system, 1e-11, 0.04);

    ModelConfig config{m, trait, eps, 1e-11, 0.4, false, 400};
    const SteadyState continuum = solve_steady_state(config);

    // The bin densities are the continuum samples times the bin width.
    const double da = trait.spacing();
    double worst = 0.0;
    for (int i = 0; i < trait.cells(); ++i) {
        for (int ix = 0; ix < g.node_count(); ++ix) {
            worst = std::max(worst, std::abs(species[i][ix] -
                                             da * continuum.u(ix, i)));
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("steady_discrete requires mutation") {
    const SpatialGrid g = SpatialGrid::interval(1.0, 32);
    const SpatialField m = cosine_habitat(g);
    DiscreteTraitSystem system{{0.5, 2.0}, tridiagonal_mutation(2, 0.75),
                               0.0, m};
    CHECK_THROWS_AS(steady_discrete(system, 1e-9), ConfigError);
}
