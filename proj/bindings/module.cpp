#include <pybind11/pybind11.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include "dispersal/airy.hpp"
#include "dispersal/asymptotics.hpp"
#include "dispersal/discrete.hpp"
#include "dispersal/experiment.hpp"
#include "dispersal/grid.hpp"
#include "dispersal/logistic.hpp"
#include "dispersal/solver.hpp"
#include "dispersal/spectral.hpp"

namespace py = pybind11;
using namespace dispersal;

namespace {

SpatialField field_from_array(const SpatialGrid& grid,
                              const Eigen::VectorXd& values) {
    return SpatialField(grid, values);
}

py::array_t<double> state_to_array(const StateField& u) {
    const int nx = u.spatial_grid().node_count();
    const int na = u.trait_grid().cells();
    py::array_t<double> out({nx, na});
    auto r = out.mutable_unchecked<2>();
    for (int ix = 0; ix < nx; ++ix) {
        for (int ia = 0; ia < na; ++ia) {
            r(ix, ia) = u(ix, ia);
        }
    }
    return out;
}

StateField state_from_array(const SpatialGrid& grid, const TraitGrid& trait,
                            py::array_t<double, py::array::c_style |
                                                    py::array::forcecast>
                                values) {
    if (values.ndim() != 2 || values.shape(0) != grid.node_count() ||
        values.shape(1) != trait.cells()) {
        throw GridMismatch("state array must have shape (nx, n_alpha)");
    }
    StateField u(grid, trait, 0.0);
    auto r = values.unchecked<2>();
    for (int ix = 0; ix < grid.node_count(); ++ix) {
        for (int ia = 0; ia < trait.cells(); ++ia) {
            u(ix, ia) = r(ix, ia);
        }
    }
    return u;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Steady states, eigenvalue curves and boundary-layer "
              "diagnostics of a mutation-selection dispersal model";

    py::register_exception<NonConvergence>(m, "NonConvergenceError");
    py::register_exception<NonExistence>(m, "NonExistenceError");
    py::register_exception<BlowUp>(m, "BlowUpError");
    py::register_exception<NonPositive>(m, "NonPositiveError");
    py::register_exception<GridMismatch>(m, "GridMismatchError");
    py::register_exception<InvalidA1>(m, "InvalidA1Error");
    py::register_exception<ConfigError>(m, "ConfigurationError");
    py::register_exception<Error>(m, "DispersalError");

    py::class_<SpatialGrid>(m, "SpatialGrid")
        .def_static("interval", &SpatialGrid::interval, py::arg("length"),
                    py::arg("cells"))
        .def_static("rectangle", &SpatialGrid::rectangle, py::arg("length_x"),
                    py::arg("length_y"), py::arg("cells_x"), py::arg("cells_y"))
        .def_property_readonly("dimension", &SpatialGrid::dimension)
        .def_property_readonly("node_count", &SpatialGrid::node_count)
        .def_property_readonly("cell_volume", &SpatialGrid::cell_volume)
        .def("spacing", &SpatialGrid::spacing, py::arg("axis") = 0)
        .def("coordinates", [](const SpatialGrid& g, int axis) {
            Eigen::VectorXd x(g.node_count());
            for (int i = 0; i < g.node_count(); ++i) {
                x[i] = g.coordinate(i, axis);
            }
            return x;
        }, py::arg("axis") = 0);

    py::class_<TraitGrid>(m, "TraitGrid")
        .def(py::init<double, double, int>(), py::arg("alpha_lo"),
             py::arg("alpha_hi"), py::arg("cells"))
        .def_property_readonly("alpha_lo", &TraitGrid::alpha_lo)
        .def_property_readonly("alpha_hi", &TraitGrid::alpha_hi)
        .def_property_readonly("cells", &TraitGrid::cells)
        .def_property_readonly("spacing", &TraitGrid::spacing)
        .def("nodes", [](const TraitGrid& t) {
            Eigen::VectorXd a(t.cells());
            for (int i = 0; i < t.cells(); ++i) a[i] = t.node(i);
            return a;
        });

    py::class_<SpatialField>(m, "SpatialField")
        .def(py::init(&field_from_array), py::arg("grid"), py::arg("values"))
        .def_property_readonly("grid", &SpatialField::grid)
        .def_property_readonly(
            "values", [](const SpatialField& f) { return f.values(); });

    py::class_<StateField>(m, "StateField")
        .def(py::init(&state_from_array), py::arg("spatial_grid"),
             py::arg("trait_grid"), py::arg("values"))
        .def_property_readonly("spatial_grid", &StateField::spatial_grid)
        .def_property_readonly("trait_grid", &StateField::trait_grid)
        .def_property_readonly("values", &state_to_array);

    m.def("integrate_trait", &integrate_trait, py::arg("u"));
    m.def("integrate_spatial", &integrate_spatial, py::arg("f"));

    py::class_<LogisticSolution>(m, "LogisticSolution")
        .def_readonly("theta", &LogisticSolution::theta)
        .def_readonly("alpha", &LogisticSolution::alpha)
        .def_readonly("residual_inf", &LogisticSolution::residual_inf)
        .def_readonly("iterations", &LogisticSolution::iterations);

    m.def("solve_theta", &solve_theta, py::arg("alpha"), py::arg("m"),
          py::arg("tol") = 1e-10, py::arg("initial_guess") = nullptr,
          "Positive steady state of the spatial logistic equation");

    py::class_<EigenPair>(m, "EigenPair")
        .def_readonly("lam", &EigenPair::lambda)
        .def_readonly("phi", &EigenPair::phi)
        .def_readonly("residual_inf", &EigenPair::residual_inf)
        .def_readonly("normalization", &EigenPair::normalization);

    m.def(
        "principal_eigenpair",
        [](double alpha, const SpatialField& h, double normalization) {
            return principal_eigenpair(alpha, h, normalization);
        },
        py::arg("alpha"), py::arg("h"), py::arg("normalization") = 1.0,
        "Smallest eigenpair of -alpha Lap + h with Neumann closure");
    m.def("eigen_derivative_alpha", &eigen_derivative_alpha, py::arg("pair"));
    m.def("rayleigh_quotient", &rayleigh_quotient, py::arg("alpha"),
          py::arg("h"), py::arg("phi"));

    py::class_<SigmaCurve>(m, "SigmaCurve")
        .def_readonly("alphas", &SigmaCurve::alphas)
        .def_readonly("sigmas", &SigmaCurve::sigmas)
        .def_readonly("derivatives", &SigmaCurve::derivatives)
        .def_readonly("sigma0", &SigmaCurve::sigma0)
        .def_readonly("sigma1", &SigmaCurve::sigma1);

    m.def("sigma_star_curve", &sigma_star_curve, py::arg("m"),
          py::arg("theta"), py::arg("alphas"));

    m.def("airy_ai", py::vectorize(airy_ai), py::arg("x"));
    m.def("airy_ai_prime", py::vectorize(airy_ai_prime), py::arg("x"));
    m.def("find_a0", &find_a0,
          "Absolute value of the first negative zero of Ai'");

    py::class_<AiryProfile>(m, "AiryProfile")
        .def_readonly("a1", &AiryProfile::a1)
        .def_readonly("a0", &AiryProfile::a0)
        .def_readonly("s_max", &AiryProfile::s_max)
        .def_readonly("s", &AiryProfile::s)
        .def_readonly("eta", &AiryProfile::eta)
        .def_readonly("normalization", &AiryProfile::normalization)
        .def_readonly("tail_bound", &AiryProfile::tail_bound)
        .def("__call__",
             [](const AiryProfile& p,
                py::array_t<double, py::array::c_style | py::array::forcecast>
                    s) {
                 py::array_t<double> out(s.size());
                 const double* in = s.data();
                 double* o = out.mutable_data();
                 for (py::ssize_t i = 0; i < s.size(); ++i) {
                     o[i] = p.eval(in[i]);
                 }
                 out.resize(std::vector<py::ssize_t>(
                     s.shape(), s.shape() + s.ndim()));
                 return out;
             })
        .def("eval", &AiryProfile::eval, py::arg("s"))
        .def("ode_residual_inf", &AiryProfile::ode_residual_inf)
        .def("quantile", &AiryProfile::quantile, py::arg("fraction"));

    m.def("build_eta_star", &build_eta_star, py::arg("a1"),
          py::arg("s_max") = -1.0, py::arg("samples") = 4001);

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init([](const SpatialField& m_field, const TraitGrid& trait,
                         double epsilon, double steady_tol, double dt,
                         bool trivial_mode) {
                 ModelConfig c{m_field, trait,       epsilon, steady_tol,
                               dt,      trivial_mode, 400};
                 c.validate();
                 return c;
             }),
             py::arg("m"), py::arg("trait"), py::arg("epsilon"),
             py::arg("steady_tol") = 1e-9, py::arg("dt") = 0.4,
             py::arg("trivial_mode") = false)
        .def_readonly("m", &ModelConfig::m)
        .def_readonly("trait", &ModelConfig::trait)
        .def_readonly("epsilon", &ModelConfig::epsilon)
        .def_static("default_trait_cells", &ModelConfig::default_trait_cells,
                    py::arg("alpha_lo"), py::arg("alpha_hi"),
                    py::arg("epsilon"));

    py::class_<SteadyState>(m, "SteadyState")
        .def_readonly("u", &SteadyState::u)
        .def_readonly("u_hat", &SteadyState::u_hat)
        .def_readonly("v", &SteadyState::v)
        .def_readonly("residual_inf", &SteadyState::residual_inf)
        .def_readonly("iterations", &SteadyState::iterations)
        .def_readonly("epsilon", &SteadyState::epsilon)
        .def_readonly("mu1", &SteadyState::mu1)
        .def("check_invariants", &SteadyState::check_invariants,
             py::arg("config"), py::arg("seed") = 0);

    m.def("existence_mu1", &existence_mu1, py::arg("config"));
    m.def(
        "solve_steady_state",
        [](const ModelConfig& config, const StateField* guess) {
            return solve_steady_state(config, guess);
        },
        py::arg("config"), py::arg("initial_guess") = nullptr,
        "Positive steady state of the mutation-selection equation");
    m.def("evolve", &evolve, py::arg("config"), py::arg("u0"), py::arg("t_end"),
          py::arg("dt"));
    m.def("evolve_until_steady", &evolve_until_steady, py::arg("config"),
          py::arg("u0"), py::arg("dt"), py::arg("max_time"));

    py::class_<TheoryProfile>(m, "TheoryProfile")
        .def_readonly("theta", &TheoryProfile::theta)
        .def_readonly("eta", &TheoryProfile::eta)
        .def_readonly("sigma1_star", &TheoryProfile::sigma1_star)
        .def("materialize", &TheoryProfile::materialize, py::arg("trait"),
             py::arg("epsilon"))
        .def("sup_norm", &TheoryProfile::sup_norm);

    m.def("build_theory_profile", &build_theory_profile, py::arg("m"),
          py::arg("config"));
    m.def("profile_error", &profile_error, py::arg("state"), py::arg("theory"));
    m.def("uhat_error", &uhat_error, py::arg("state"), py::arg("theta"));
    m.def("tail_decay_fit", &tail_decay_fit, py::arg("state"),
          py::arg("s_lo") = 1.0,
          py::arg("s_hi") = std::numeric_limits<double>::infinity());
    m.def("concentration_mass", &concentration_mass, py::arg("state"),
          py::arg("k_band"));

    py::class_<SweepRecord>(m, "SweepRecord")
        .def_readonly("epsilon", &SweepRecord::epsilon)
        .def_readonly("sigma0", &SweepRecord::sigma0)
        .def_readonly("sigma1", &SweepRecord::sigma1)
        .def_readonly("sup_u", &SweepRecord::sup_u)
        .def_readonly("uhat_err", &SweepRecord::uhat_err)
        .def_readonly("profile_err", &SweepRecord::profile_err)
        .def_readonly("beta_hat", &SweepRecord::beta_hat)
        .def_readonly("mass_frac", &SweepRecord::mass_frac)
        .def_readonly("loggrad_alpha", &SweepRecord::loggrad_alpha)
        .def_readonly("loggrad_x", &SweepRecord::loggrad_x)
        .def_readonly("residual_inf", &SweepRecord::residual_inf)
        .def_readonly("iterations", &SweepRecord::iterations)
        .def_readonly("trait_cells", &SweepRecord::trait_cells)
        .def_readonly("mu1", &SweepRecord::mu1);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("slope", &FitResult::slope)
        .def_readonly("stderr", &FitResult::stderr)
        .def_readonly("ci_halfwidth", &FitResult::ci_halfwidth);

    py::class_<ScalingFits>(m, "ScalingFits")
        .def_readonly("sigma0_slope", &ScalingFits::sigma0_slope)
        .def_readonly("supu_slope", &ScalingFits::supu_slope)
        .def_readonly("ratio_at_min_eps", &ScalingFits::ratio_at_min_eps)
        .def_readonly("ratio_limit", &ScalingFits::ratio_limit)
        .def_readonly("ratios", &ScalingFits::ratios);

    py::class_<SweepReport>(m, "SweepReport")
        .def_readonly("records", &SweepReport::records)
        .def_readonly("sigma1_star", &SweepReport::sigma1_star)
        .def_readonly("concentration_k", &SweepReport::concentration_k)
        .def_readonly("theory_sup", &SweepReport::theory_sup)
        .def_readonly("fits", &SweepReport::fits);

    m.def(
        "run_sweep",
        [](const SpatialField& m_field, double alpha_lo, double alpha_hi,
           const std::vector<double>& epsilons, double steady_tol, double dt,
           int trait_cells) {
            SweepConfig config{m_field, alpha_lo,   alpha_hi,   epsilons,
                               steady_tol, dt, trait_cells};
            return run_sweep(config);
        },
        py::arg("m"), py::arg("alpha_lo"), py::arg("alpha_hi"),
        py::arg("epsilons"), py::arg("steady_tol") = 1e-9,
        py::arg("dt") = 0.4, py::arg("trait_cells") = 0);

    py::class_<DiscreteTraitSystem>(m, "DiscreteTraitSystem")
        .def(py::init([](std::vector<double> alphas, Eigen::MatrixXd mutation,
                         double epsilon, const SpatialField& m_field) {
                 DiscreteTraitSystem s{std::move(alphas), std::move(mutation),
                                       epsilon, m_field};
                 s.validate();
                 return s;
             }),
             py::arg("alphas"), py::arg("mutation"), py::arg("epsilon"),
             py::arg("m"))
        .def_readonly("alphas", &DiscreteTraitSystem::alphas)
        .def_readonly("mutation", &DiscreteTraitSystem::mutation)
        .def_readonly("epsilon", &DiscreteTraitSystem::epsilon);

    m.def("tridiagonal_mutation", &tridiagonal_mutation, py::arg("k"),
          py::arg("spacing"));
    m.def("from_trait_grid", &from_trait_grid, py::arg("trait"),
          py::arg("epsilon"), py::arg("m"));
    m.def("evolve_discrete", &evolve_discrete, py::arg("system"),
          py::arg("u0"), py::arg("t_end"), py::arg("dt"));
    m.def("steady_discrete", &steady_discrete, py::arg("system"),
          py::arg("tol"), py::arg("dt") = 0.05, py::arg("max_time") = 2e4);
    m.def("species_masses", &species_masses, py::arg("system"), py::arg("u"));
    m.def("discrete_residual", &discrete_residual, py::arg("system"),
          py::arg("u"));

    m.def(
        "run_experiment",
        [](const std::string& config_path) {
            return dispersal::run(dispersal::load_spec(config_path));
        },
        py::arg("config_path"),
        "Run a JSON-configured experiment, writing artifacts to its out_dir");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
