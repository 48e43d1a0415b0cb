"""End-to-end smoke tests of the python bindings."""

import math

import numpy as np
import pytest

import dispersal as dp


@pytest.fixture(scope="module")
def grid():
    return dp.SpatialGrid.interval(1.0, 64)


@pytest.fixture(scope="module")
def habitat(grid):
    x = grid.coordinates()
    return dp.SpatialField(grid, 1.0 + 0.5 * np.cos(np.pi * x))


def test_airy_values():
    assert dp.airy_ai(0.0) == pytest.approx(0.3550280539, abs=1e-9)
    assert dp.airy_ai_prime(0.0) == pytest.approx(-0.2588194038, abs=1e-9)
    assert dp.find_a0() == pytest.approx(1.0187929716, abs=1e-8)
    xs = np.linspace(-5.0, 5.0, 41)
    values = dp.airy_ai(xs)
    assert values.shape == xs.shape
    assert np.all(np.isfinite(values))


def test_eta_star_profile():
    eta = dp.build_eta_star(1.0)
    assert eta.a0 == pytest.approx(dp.find_a0(), rel=1e-12)
    assert eta.ode_residual_inf() < 1e-6
    s = np.asarray(eta.s)
    vals = eta(s)
    assert vals[0] == pytest.approx(eta.eta[0], rel=1e-12)
    assert eta.quantile(0.99) > eta.quantile(0.5)


def test_logistic_and_eigen_chain(grid, habitat):
    theta = dp.solve_theta(0.5, habitat)
    assert theta.residual_inf <= 1e-10
    th = theta.theta.values
    m = habitat.values
    h = dp.SpatialField(grid, th - m)
    norm = dp.integrate_spatial(dp.SpatialField(grid, th**2))
    pair = dp.principal_eigenpair(0.5, h, norm)
    assert abs(pair.lam) < 5e-7
    assert np.max(np.abs(pair.phi.values - th)) < 1e-5
    assert dp.eigen_derivative_alpha(pair) > 0.0


def test_trivial_steady_state(grid):
    ones = dp.SpatialField(grid, np.ones(64))
    trait = dp.TraitGrid(0.5, 2.0, 64)
    config = dp.ModelConfig(ones, trait, epsilon=0.1, trivial_mode=True)
    steady = dp.solve_steady_state(config)
    assert steady.u.values == pytest.approx(1.0 / 1.5, abs=1e-8)
    assert steady.mu1 == pytest.approx(-1.0, abs=1e-8)
    assert steady.check_invariants(config) == []


def test_steady_state_identities(grid, habitat):
    trait = dp.TraitGrid(0.5, 2.0, 96)
    config = dp.ModelConfig(habitat, trait, epsilon=0.1)
    steady = dp.solve_steady_state(config)
    uhat = steady.u_hat.values
    m = habitat.values
    balance = dp.integrate_spatial(dp.SpatialField(grid, uhat * (m - uhat)))
    assert abs(balance) < 1e-8
    assert dp.integrate_spatial(dp.SpatialField(grid, uhat - m)) > 0.0
    assert np.all(steady.u.values > 0.0)


def test_evolve_mass_identity(grid, habitat):
    trait = dp.TraitGrid(0.5, 2.0, 64)
    config = dp.ModelConfig(habitat, trait, epsilon=0.2)
    u0 = dp.StateField(grid, trait,
                       np.full((64, 64), 1.0 / trait.spacing / 64 / 1.0))
    dt = 0.1
    u1 = dp.evolve(config, u0, dt, dt)
    mass0 = np.sum(u0.values) * grid.cell_volume * trait.spacing
    mass1 = np.sum(u1.values) * grid.cell_volume * trait.spacing
    uhat = dp.integrate_trait(u0).values
    reaction = dp.integrate_spatial(
        dp.SpatialField(grid, uhat * (habitat.values - uhat)))
    assert (mass1 - mass0) / dt == pytest.approx(reaction, abs=1e-10)


def test_discrete_dominance(grid, habitat):
    system = dp.DiscreteTraitSystem([0.5, 1.0, 2.0],
                                    dp.tridiagonal_mutation(3, 0.5),
                                    0.1, habitat)
    u = dp.steady_discrete(system, 1e-8)
    masses = dp.species_masses(system, u)
    assert masses[0] > masses[1] > masses[2]


def test_theory_profile_and_errors(grid, habitat):
    trait = dp.TraitGrid(0.5, 2.0, 128)
    config = dp.ModelConfig(habitat, trait, epsilon=0.05)
    theory = dp.build_theory_profile(habitat, config)
    assert theory.sigma1_star > 0.0
    predicted = theory.materialize(trait, 0.05)
    assert predicted.values.shape == (64, 128)


def test_errors_are_typed(grid):
    ones = dp.SpatialField(grid, np.ones(64))
    trait = dp.TraitGrid(0.5, 2.0, 64)
    with pytest.raises(dp.ConfigurationError):
        dp.ModelConfig(ones, trait, epsilon=0.1)  # constant m without flag
    with pytest.raises(dp.InvalidA1Error):
        dp.build_eta_star(-0.5)
