#include "dispersal/asymptotics.hpp"

#include <algorithm>
#include <cmath>

namespace dispersal {

namespace {

FitResult fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    FitResult fit;
    fit.slope = sxy / sxx;
    double sse = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - my - fit.slope * (x[i] - mx);
        sse += r * r;
    }
    if (n > 2) {
        fit.stderr = std::sqrt(sse / (n - 2) / sxx);
        fit.ci_halfwidth = 2.0 * fit.stderr;
    }
    return fit;
}

}  // namespace

StateField TheoryProfile::materialize(const TraitGrid& trait,
                                      double epsilon) const {
    const double layer = std::pow(epsilon, 2.0 / 3.0);
    StateField out(theta.theta.grid(), trait, 0.0);
    for (int ia = 0; ia < trait.cells(); ++ia) {
        const double s = (trait.node(ia) - trait.alpha_lo()) / layer;
        const double e = eta.eval(s) / layer;
        for (int ix = 0; ix < theta.theta.size(); ++ix) {
            out(ix, ia) = theta.theta[ix] * e;
        }
    }
    return out;
}

double TheoryProfile::sup_norm() const {
    return theta.theta.max() * eta.eval(0.0);
}

TheoryProfile build_theory_profile(const SpatialField& m,
                                   const ModelConfig& config) {
    if (integrate_spatial(m) <= 0.0) {
        throw ConfigError(
            "build_theory_profile: habitat integral must be positive");
    }
    LogisticSolution theta = solve_theta(config.trait.alpha_lo(), m);
    const SpatialField h(m.grid(), theta.theta.values() - m.values());
    const double normalization = integrate_spatial(
        SpatialField(m.grid(), theta.theta.values().cwiseAbs2()));
    EigenPair base = principal_eigenpair(config.trait.alpha_lo(), h,
                                         normalization, &theta.theta.values());
    const double sigma1_star = eigen_derivative_alpha(base);
    AiryProfile eta = build_eta_star(sigma1_star);
    return TheoryProfile{std::move(theta), std::move(eta), sigma1_star};
}

double profile_error(const SteadyState& state, const TheoryProfile& theory) {
    if (state.u.spatial_grid() != theory.theta.theta.grid()) {
        throw GridMismatch("profile_error: spatial grids differ");
    }
    const TraitGrid& trait = state.u.trait_grid();
    const double layer = std::pow(state.epsilon, 2.0 / 3.0);
    double worst = 0.0;
    for (int ia = 0; ia < trait.cells(); ++ia) {
        const double s = (trait.node(ia) - trait.alpha_lo()) / layer;
        const double e = theory.eta.eval(s);
        for (int ix = 0; ix < theory.theta.theta.size(); ++ix) {
            const double diff =
                layer * state.u(ix, ia) - theory.theta.theta[ix] * e;
            worst = std::max(worst, std::abs(diff));
        }
    }
    return worst;
}

double uhat_error(const SteadyState& state, const LogisticSolution& theta) {
    if (state.u_hat.grid() != theta.theta.grid()) {
        throw GridMismatch("uhat_error: spatial grids differ");
    }
    return (state.u_hat.values() - theta.theta.values())
        .cwiseAbs()
        .maxCoeff();
}

double tail_decay_fit(const SteadyState& state, double s_lo, double s_hi) {
    const TraitGrid& trait = state.u.trait_grid();
    const int nx = state.u.spatial_grid().node_count();
    const double layer = std::pow(state.epsilon, 2.0 / 3.0);
    const double sup = state.u.max();

    std::vector<double> s, logmax;
    for (int ia = 0; ia < trait.cells(); ++ia) {
        double g = 0.0;
        for (int ix = 0; ix < nx; ++ix) g = std::max(g, state.u(ix, ia));
        const double si = (trait.node(ia) - trait.alpha_lo()) / layer;
        if (g >= 1e-12 * sup && si >= s_lo && si <= s_hi) {
            s.push_back(si);
            logmax.push_back(std::log(g));
        }
    }
    if (s.size() < 6 || s.back() - s.front() < 1.0) {
        throw InsufficientTail(
            "tail_decay_fit: resolved tail window too short (" +
            std::to_string(s.size()) + " samples)");
    }
    return -fit_line(s, logmax).slope;
}

double concentration_mass(const SteadyState& state, double k_band) {
    const TraitGrid& trait = state.u.trait_grid();
    const int nx = state.u.spatial_grid().node_count();
    const double layer = std::pow(state.epsilon, 2.0 / 3.0);
    const double edge = trait.alpha_lo() + k_band * layer;
    const double da = trait.spacing();
    double inside = 0.0, total = 0.0;
    for (int ia = 0; ia < trait.cells(); ++ia) {
        double row = 0.0;
        for (int ix = 0; ix < nx; ++ix) row += state.u(ix, ia);
        const double lo = trait.alpha_lo() + ia * da;
        const double coverage = std::clamp((edge - lo) / da, 0.0, 1.0);
        inside += coverage * row;
        total += row;
    }
    return (total > 0.0) ? inside / total : 0.0;
}

ScalingFits scaling_fits(const std::vector<SweepRecord>& records,
                         double sigma1_star) {
    if (records.size() < 4) {
        throw InsufficientData("scaling_fits: need at least 4 epsilon values");
    }
    double eps_min = records.front().epsilon, eps_max = eps_min;
    for (const auto& r : records) {
        eps_min = std::min(eps_min, r.epsilon);
        eps_max = std::max(eps_max, r.epsilon);
    }
    if (eps_max / eps_min < 7.9) {
        throw InsufficientData(
            "scaling_fits: sweep must span a factor of at least 8 in epsilon");
    }
    std::vector<double> log_eps, log_sigma0, log_sup;
    for (const auto& r : records) {
        if (!(r.sigma0 < 0.0)) {
            throw InsufficientData(
                "scaling_fits: sigma0 must be negative at every epsilon");
        }
        log_eps.push_back(std::log(r.epsilon));
        log_sigma0.push_back(std::log(-r.sigma0));
        log_sup.push_back(std::log(r.sup_u));
    }
    ScalingFits fits;
    fits.sigma0_slope = fit_line(log_eps, log_sigma0);
    fits.supu_slope = fit_line(log_eps, log_sup);
    fits.ratio_limit =
        std::pow(sigma1_star, 2.0 / 3.0) * find_a0();

    std::vector<SweepRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(),
              [](const SweepRecord& a, const SweepRecord& b) {
                  return a.epsilon < b.epsilon;
              });
    for (std::size_t i = 0; i < std::min<std::size_t>(3, sorted.size()); ++i) {
        fits.ratios.push_back(-sorted[i].sigma0 /
                              std::pow(sorted[i].epsilon, 2.0 / 3.0));
    }
    fits.ratio_at_min_eps = fits.ratios.front();
    return fits;
}

SweepReport run_sweep(const SweepConfig& config) {
    if (config.epsilons.empty()) {
        throw ConfigError("sweep.epsilons: empty");
    }
    std::vector<double> eps = config.epsilons;
    std::sort(eps.begin(), eps.end(), std::greater<double>());

    ModelConfig base{config.m,
                     TraitGrid(config.alpha_lo, config.alpha_hi, 128),
                     eps.front(),
                     config.steady_tol,
                     config.dt,
                     false,
                     400};
    const TheoryProfile theory = build_theory_profile(config.m, base);
    const double normalization = integrate_spatial(SpatialField(
        config.m.grid(), theory.theta.theta.values().cwiseAbs2()));

    SweepReport report;
    report.sigma1_star = theory.sigma1_star;
    report.concentration_k = theory.eta.quantile(0.99);
    report.theory_sup = theory.sup_norm();

    SteadyState previous{StateField(config.m.grid(),
                                    TraitGrid(config.alpha_lo, config.alpha_hi, 2),
                                    0.0),
                         SpatialField(config.m.grid(), 0.0),
                         SpatialField(config.m.grid(), 0.0),
                         0.0,
                         0,
                         0.0,
                         0.0};
    bool have_previous = false;

    for (double e : eps) {
        const int cells =
            (config.trait_cells_override > 0)
                ? config.trait_cells_override
                : ModelConfig::default_trait_cells(config.alpha_lo,
                                                   config.alpha_hi, e);
        ModelConfig mc{config.m,
                       TraitGrid(config.alpha_lo, config.alpha_hi, cells),
                       e,
                       config.steady_tol,
                       config.dt,
                       false,
                       400};
        SteadyState state =
            have_previous
                ? [&] {
                      StateField guess = rescale_state(previous, mc);
                      return solve_steady_state(mc, &guess);
                  }()
                : solve_steady_state(mc);

        SweepRecord rec;
        rec.epsilon = e;
        rec.trait_cells = cells;
        rec.residual_inf = state.residual_inf;
        rec.iterations = state.iterations;
        rec.mu1 = state.mu1;
        rec.sup_u = state.u.max();
        rec.uhat_err = uhat_error(state, theory.theta);
        rec.profile_err = profile_error(state, theory);
        rec.beta_hat = tail_decay_fit(state);
        rec.mass_frac = concentration_mass(state, report.concentration_k);

        const SpatialField h_eps(config.m.grid(),
                                 state.u_hat.values() - config.m.values());
        EigenPair aux = principal_eigenpair(config.alpha_lo, h_eps,
                                            normalization,
                                            &theory.theta.theta.values());
        rec.sigma0 = aux.lambda;
        rec.sigma1 = eigen_derivative_alpha(aux);

        // Log-gradient sup norms via face differences of log u.
        const TraitGrid& trait = state.u.trait_grid();
        const int nx = config.m.grid().node_count();
        double lga = 0.0;
        for (int ia = 0; ia + 1 < trait.cells(); ++ia) {
            for (int ix = 0; ix < nx; ++ix) {
                lga = std::max(lga,
                               std::abs(std::log(state.u(ix, ia + 1)) -
                                        std::log(state.u(ix, ia))) /
                                   trait.spacing());
            }
        }
        double lgx = 0.0;
        const SpatialGrid& sg = config.m.grid();
        const int nx0 = sg.cells(0);
        for (int axis = 0; axis < sg.dimension(); ++axis) {
            const int stride = (axis == 0) ? 1 : nx0;
            const double h = sg.spacing(axis);
            for (int ia = 0; ia < trait.cells(); ++ia) {
                for (int ix = 0; ix < nx; ++ix) {
                    const int along =
                        (axis == 0) ? ix % nx0 : ix / nx0;
                    if (along + 1 >= sg.cells(axis)) continue;
                    lgx = std::max(
                        lgx, std::abs(std::log(state.u(ix + stride, ia)) -
                                      std::log(state.u(ix, ia))) /
                                 h);
                }
            }
        }
        rec.loggrad_alpha = lga;
        rec.loggrad_x = lgx;

        report.records.push_back(rec);
        if (config.keep_states) {
            report.states.push_back(state);
        }
        previous = std::move(state);
        have_previous = true;
    }

    report.fits = scaling_fits(report.records, report.sigma1_star);
    return report;
}

}  // namespace dispersal
