#include "dispersal/experiment.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace dispersal {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void reject_unknown_keys(const json& obj, const std::string& prefix,
                         const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError(prefix + it.key() + ": unknown field");
        }
    }
}

template <typename T>
T field_or(const json& obj, const std::string& key, const T& fallback,
           const std::string& path) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + key + ": wrong type");
    }
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

std::string artifact_header(const char* format, const ExperimentSpec& spec) {
    return std::string("# format=") + format +
           " config=" + config_hash_hex(spec) + "\n";
}

json json_vector(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

json sweep_report_json(const ExperimentSpec& spec, const SweepReport& report) {
    json doc;
    doc["format"] = kSweepFormat;
    doc["config_hash"] = config_hash_hex(spec);
    doc["sigma1_star"] = report.sigma1_star;
    doc["concentration_k"] = report.concentration_k;
    doc["theory_sup"] = report.theory_sup;
    json records = json::array();
    for (const auto& r : report.records) {
        json rec;
        rec["epsilon"] = r.epsilon;
        rec["sigma0"] = r.sigma0;
        rec["sigma1"] = r.sigma1;
        rec["sup_u"] = r.sup_u;
        rec["uhat_err"] = r.uhat_err;
        rec["profile_err"] = r.profile_err;
        rec["beta_hat"] = r.beta_hat;
        rec["mass_frac"] = r.mass_frac;
        rec["loggrad_alpha"] = r.loggrad_alpha;
        rec["loggrad_x"] = r.loggrad_x;
        rec["residual_inf"] = r.residual_inf;
        rec["iterations"] = r.iterations;
        rec["trait_cells"] = r.trait_cells;
        rec["mu1"] = r.mu1;
        records.push_back(rec);
    }
    doc["records"] = records;
    doc["fits"] = {
        {"sigma0_slope", report.fits.sigma0_slope.slope},
        {"sigma0_slope_ci", report.fits.sigma0_slope.ci_halfwidth},
        {"supu_slope", report.fits.supu_slope.slope},
        {"supu_slope_ci", report.fits.supu_slope.ci_halfwidth},
        {"ratio_at_min_eps", report.fits.ratio_at_min_eps},
        {"ratio_limit", report.fits.ratio_limit},
        {"ratios_smallest", report.fits.ratios},
    };
    return doc;
}

}  // namespace

ExperimentSpec parse_spec(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    reject_unknown_keys(doc, "",
                        {"mode", "seed", "domain", "trait", "habitat",
                         "epsilon", "epsilons", "time", "steady_tol",
                         "trivial_mode", "alphas", "airy", "discrete",
                         "out_dir"});
    ExperimentSpec spec;
    spec.mode = field_or<std::string>(doc, "mode", spec.mode, "");
    const std::set<std::string> modes{"steady",      "evolve", "sweep",
                                      "eigen-curve", "airy",   "discrete"};
    if (!modes.count(spec.mode)) {
        throw ConfigError("mode: must be one of steady|evolve|sweep|"
                          "eigen-curve|airy|discrete");
    }
    spec.seed = field_or<unsigned>(doc, "seed", spec.seed, "");
    spec.out_dir = field_or<std::string>(doc, "out_dir", spec.out_dir, "");

    if (doc.contains("domain")) {
        const json& d = doc.at("domain");
        reject_unknown_keys(d, "domain.", {"dimension", "extent", "cells"});
        spec.dimension = field_or<int>(d, "dimension", 1, "domain.");
        if (spec.dimension != 1 && spec.dimension != 2) {
            throw ConfigError("domain.dimension: must be 1 or 2");
        }
        spec.extent = field_or<std::vector<double>>(
            d, "extent", std::vector<double>(spec.dimension, 1.0), "domain.");
        spec.cells = field_or<std::vector<int>>(
            d, "cells", std::vector<int>(spec.dimension, 96), "domain.");
        if (static_cast<int>(spec.extent.size()) != spec.dimension) {
            throw ConfigError("domain.extent: length must match dimension");
        }
        if (static_cast<int>(spec.cells.size()) != spec.dimension) {
            throw ConfigError("domain.cells: length must match dimension");
        }
    }

    if (doc.contains("trait")) {
        const json& t = doc.at("trait");
        reject_unknown_keys(t, "trait.", {"alpha_lo", "alpha_hi", "cells"});
        spec.alpha_lo = field_or<double>(t, "alpha_lo", spec.alpha_lo, "trait.");
        spec.alpha_hi = field_or<double>(t, "alpha_hi", spec.alpha_hi, "trait.");
        spec.trait_cells = field_or<int>(t, "cells", 0, "trait.");
        if (!(spec.alpha_lo > 0.0) || !(spec.alpha_hi > spec.alpha_lo)) {
            throw ConfigError("trait.alpha_lo: need 0 < alpha_lo < alpha_hi");
        }
    }

    if (doc.contains("habitat")) {
        const json& h = doc.at("habitat");
        reject_unknown_keys(h, "habitat.",
                            {"preset", "base", "amplitude", "samples"});
        if (h.contains("samples")) {
            spec.habitat_preset = "samples";
            spec.habitat_samples = field_or<std::vector<double>>(
                h, "samples", {}, "habitat.");
            if (spec.habitat_samples.empty()) {
                throw ConfigError("habitat.samples: empty");
            }
        } else {
            spec.habitat_preset =
                field_or<std::string>(h, "preset", "cosine", "habitat.");
            const std::set<std::string> presets{"one", "cosine", "two-bump"};
            if (!presets.count(spec.habitat_preset)) {
                throw ConfigError(
                    "habitat.preset: must be one|cosine|two-bump or inline "
                    "samples");
            }
        }
        spec.habitat_base = field_or<double>(h, "base", 1.0, "habitat.");
        spec.habitat_amplitude =
            field_or<double>(h, "amplitude", 0.5, "habitat.");
    }

    spec.epsilon = field_or<double>(doc, "epsilon", spec.epsilon, "");
    if (!(spec.epsilon > 0.0)) throw ConfigError("epsilon: must be positive");
    spec.epsilons =
        field_or<std::vector<double>>(doc, "epsilons", spec.epsilons, "");
    for (double e : spec.epsilons) {
        if (!(e > 0.0)) throw ConfigError("epsilons: entries must be positive");
    }

    if (doc.contains("time")) {
        const json& t = doc.at("time");
        reject_unknown_keys(t, "time.", {"t_end", "dt"});
        spec.t_end = field_or<double>(t, "t_end", spec.t_end, "time.");
        spec.dt = field_or<double>(t, "dt", spec.dt, "time.");
        if (!(spec.dt > 0.0) || !(spec.t_end >= 0.0)) {
            throw ConfigError("time.dt: need dt > 0 and t_end >= 0");
        }
    }

    spec.steady_tol = field_or<double>(doc, "steady_tol", spec.steady_tol, "");
    if (!(spec.steady_tol > 0.0)) {
        throw ConfigError("steady_tol: must be positive");
    }
    spec.trivial_mode = field_or<bool>(doc, "trivial_mode", false, "");
    spec.alphas = field_or<std::vector<double>>(doc, "alphas", {}, "");

    if (doc.contains("airy")) {
        const json& a = doc.at("airy");
        reject_unknown_keys(a, "airy.", {"a1", "s_max", "samples"});
        spec.airy_a1 = field_or<double>(a, "a1", 0.0, "airy.");
        spec.airy_s_max = field_or<double>(a, "s_max", 0.0, "airy.");
        spec.airy_samples = field_or<int>(a, "samples", 4001, "airy.");
    }

    if (doc.contains("discrete")) {
        const json& d = doc.at("discrete");
        reject_unknown_keys(d, "discrete.",
                            {"alphas", "epsilon", "t_end", "dt", "tol"});
        spec.discrete_alphas = field_or<std::vector<double>>(
            d, "alphas", spec.discrete_alphas, "discrete.");
        spec.discrete_epsilon =
            field_or<double>(d, "epsilon", spec.discrete_epsilon, "discrete.");
        spec.discrete_t_end =
            field_or<double>(d, "t_end", spec.discrete_t_end, "discrete.");
        spec.discrete_dt =
            field_or<double>(d, "dt", spec.discrete_dt, "discrete.");
        spec.discrete_tol =
            field_or<double>(d, "tol", spec.discrete_tol, "discrete.");
    }
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return parse_spec(doc);
}

json spec_to_json(const ExperimentSpec& spec) {
    json doc;
    doc["mode"] = spec.mode;
    doc["seed"] = spec.seed;
    doc["out_dir"] = spec.out_dir;
    doc["domain"] = {{"dimension", spec.dimension},
                     {"extent", spec.extent},
                     {"cells", spec.cells}};
    doc["trait"] = {{"alpha_lo", spec.alpha_lo},
                    {"alpha_hi", spec.alpha_hi},
                    {"cells", spec.trait_cells}};
    doc["habitat"] = {{"preset", spec.habitat_preset},
                      {"base", spec.habitat_base},
                      {"amplitude", spec.habitat_amplitude},
                      {"samples", spec.habitat_samples}};
    doc["epsilon"] = spec.epsilon;
    doc["epsilons"] = spec.epsilons;
    doc["time"] = {{"t_end", spec.t_end}, {"dt", spec.dt}};
    doc["steady_tol"] = spec.steady_tol;
    doc["trivial_mode"] = spec.trivial_mode;
    doc["alphas"] = spec.alphas;
    doc["airy"] = {{"a1", spec.airy_a1},
                   {"s_max", spec.airy_s_max},
                   {"samples", spec.airy_samples}};
    doc["discrete"] = {{"alphas", spec.discrete_alphas},
                       {"epsilon", spec.discrete_epsilon},
                       {"t_end", spec.discrete_t_end},
                       {"dt", spec.discrete_dt},
                       {"tol", spec.discrete_tol}};
    return doc;
}

std::uint64_t config_hash(const ExperimentSpec& spec) {
    return fnv1a(spec_to_json(spec).dump());
}

std::string config_hash_hex(const ExperimentSpec& spec) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(spec)));
    return buf;
}

SpatialGrid make_spatial_grid(const ExperimentSpec& spec) {
    if (spec.dimension == 1) {
        return SpatialGrid::interval(spec.extent[0], spec.cells[0]);
    }
    return SpatialGrid::rectangle(spec.extent[0], spec.extent[1], spec.cells[0],
                                  spec.cells[1]);
}

SpatialField make_habitat(const ExperimentSpec& spec) {
    const SpatialGrid grid = make_spatial_grid(spec);
    if (spec.habitat_preset == "samples") {
        if (static_cast<int>(spec.habitat_samples.size()) !=
            grid.node_count()) {
            throw ConfigError("habitat.samples: length " +
                              std::to_string(spec.habitat_samples.size()) +
                              " does not match grid node count " +
                              std::to_string(grid.node_count()));
        }
        Vector v(grid.node_count());
        for (int i = 0; i < grid.node_count(); ++i) {
            v[i] = spec.habitat_samples[i];
        }
        return SpatialField(grid, std::move(v));
    }
    Vector v(grid.node_count());
    for (int i = 0; i < grid.node_count(); ++i) {
        double profile = 0.0;
        if (spec.habitat_preset == "one") {
            profile = 0.0;
        } else {
            double wave = 1.0;
            const double periods = (spec.habitat_preset == "two-bump") ? 2.0 : 1.0;
            for (int axis = 0; axis < grid.dimension(); ++axis) {
                wave *= std::cos(periods * kPi * grid.coordinate(i, axis) /
                                 grid.extent(axis));
            }
            profile = wave;
        }
        v[i] = spec.habitat_base + spec.habitat_amplitude * profile;
    }
    if (spec.habitat_preset == "one") {
        v.setConstant(spec.habitat_base);
    }
    return SpatialField(grid, std::move(v));
}

ModelConfig make_model_config(const ExperimentSpec& spec, double epsilon) {
    const int cells =
        (spec.trait_cells > 0)
            ? spec.trait_cells
            : ModelConfig::default_trait_cells(spec.alpha_lo, spec.alpha_hi,
                                               epsilon);
    ModelConfig config{make_habitat(spec),
                       TraitGrid(spec.alpha_lo, spec.alpha_hi, cells),
                       epsilon,
                       spec.steady_tol,
                       spec.dt,
                       spec.trivial_mode,
                       400};
    config.validate();
    return config;
}

void write_checkpoint(const std::string& path, const ExperimentSpec& spec,
                      const ModelConfig& config, const SteadyState& state) {
    json doc;
    doc["format"] = kCheckpointFormat;
    doc["config_hash"] = config_hash_hex(spec);
    doc["epsilon"] = state.epsilon;
    json sg;
    sg["dimension"] = config.m.grid().dimension();
    json extent = json::array(), cells = json::array();
    for (int axis = 0; axis < config.m.grid().dimension(); ++axis) {
        extent.push_back(config.m.grid().extent(axis));
        cells.push_back(config.m.grid().cells(axis));
    }
    sg["extent"] = extent;
    sg["cells"] = cells;
    doc["spatial_grid"] = sg;
    doc["trait_grid"] = {{"alpha_lo", config.trait.alpha_lo()},
                         {"alpha_hi", config.trait.alpha_hi()},
                         {"cells", config.trait.cells()}};
    doc["m"] = json_vector(config.m.values());
    doc["u"] = json_vector(state.u.values());
    doc["residual_inf"] = state.residual_inf;
    doc["iterations"] = state.iterations;
    doc["mu1"] = state.mu1;
    doc["trivial_mode"] = config.trivial_mode;
    doc["steady_tol"] = config.steady_tol;
    write_text(path, doc.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError("checkpoint parse error: " + std::string(e.what()));
    }
    if (field_or<std::string>(doc, "format", "", "") != kCheckpointFormat) {
        throw IoError("checkpoint: unsupported format tag");
    }
    const json& sg = doc.at("spatial_grid");
    const int dim = sg.at("dimension").get<int>();
    const auto extent = sg.at("extent").get<std::vector<double>>();
    const auto cells = sg.at("cells").get<std::vector<int>>();
    const SpatialGrid grid =
        (dim == 1) ? SpatialGrid::interval(extent.at(0), cells.at(0))
                   : SpatialGrid::rectangle(extent.at(0), extent.at(1),
                                            cells.at(0), cells.at(1));
    const json& tg = doc.at("trait_grid");
    const TraitGrid trait(tg.at("alpha_lo").get<double>(),
                          tg.at("alpha_hi").get<double>(),
                          tg.at("cells").get<int>());
    const auto mv = doc.at("m").get<std::vector<double>>();
    if (static_cast<int>(mv.size()) != grid.node_count()) {
        throw IoError("checkpoint: m length mismatch");
    }
    Vector m(grid.node_count());
    for (int i = 0; i < grid.node_count(); ++i) m[i] = mv[i];
    const auto uv = doc.at("u").get<std::vector<double>>();
    Vector u(static_cast<Eigen::Index>(grid.node_count()) * trait.cells());
    if (static_cast<Eigen::Index>(uv.size()) != u.size()) {
        throw IoError("checkpoint: u length mismatch");
    }
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = uv[i];

    ModelConfig config{SpatialField(grid, std::move(m)),
                       trait,
                       doc.at("epsilon").get<double>(),
                       field_or<double>(doc, "steady_tol", 1e-9, ""),
                       0.4,
                       field_or<bool>(doc, "trivial_mode", false, ""),
                       400};
    StateField state(grid, trait, std::move(u));
    SpatialField uhat = integrate_trait(state);
    SpatialField v = integrate_trait_weighted(state);
    SteadyState steady{std::move(state),
                       std::move(uhat),
                       std::move(v),
                       field_or<double>(doc, "residual_inf", 0.0, ""),
                       field_or<int>(doc, "iterations", 0, ""),
                       config.epsilon,
                       field_or<double>(doc, "mu1", 0.0, "")};
    return Checkpoint{std::move(config), std::move(steady)};
}

std::vector<std::string> check_checkpoint(const std::string& path,
                                          unsigned seed) {
    Checkpoint cp = load_checkpoint(path);
    const SparseMatrix diffusion = assemble_diffusion_operator(cp.config);
    const double rinf =
        steady_residual(cp.config, diffusion, cp.state.u).cwiseAbs().maxCoeff();
    std::vector<std::string> report =
        cp.state.check_invariants(cp.config, seed);
    const double target = cp.config.steady_tol * (1.0 + cp.state.u.max());
    if (rinf > target) {
        report.push_back("recomputed residual " + format_double(rinf) +
                         " exceeds " + format_double(target));
    }
    return report;
}

namespace {

int run_steady(const ExperimentSpec& spec) {
    ModelConfig config = make_model_config(spec, spec.epsilon);
    SteadyState state = solve_steady_state(config);
    const std::string stem = spec.out_dir + "/steady";
    write_checkpoint(stem + ".checkpoint.json", spec, config, state);
    json diag;
    diag["format"] = kCheckpointFormat;
    diag["config_hash"] = config_hash_hex(spec);
    diag["epsilon"] = state.epsilon;
    diag["residual_inf"] = state.residual_inf;
    diag["iterations"] = state.iterations;
    diag["mu1"] = state.mu1;
    diag["sup_u"] = state.u.max();
    diag["uhat_min"] = state.u_hat.min();
    diag["uhat_max"] = state.u_hat.max();
    diag["mass"] = integrate_state(state.u);
    write_text(stem + ".diagnostics.json", diag.dump(2) + "\n");
    return 0;
}

int run_evolve(const ExperimentSpec& spec) {
    ModelConfig config = make_model_config(spec, spec.epsilon);
    StateField u0(config.m.grid(), config.trait,
                  1.0 / config.trait.width());
    const double mass0 = integrate_state(u0);
    StateField u = evolve(config, u0, spec.t_end, spec.dt);
    StateField state(config.m.grid(), config.trait, u.values());
    SteadyState snapshot{std::move(u),
                         integrate_trait(state),
                         integrate_trait_weighted(state),
                         0.0,
                         0,
                         config.epsilon,
                         0.0};
    const std::string stem = spec.out_dir + "/evolve";
    write_checkpoint(stem + ".checkpoint.json", spec, config, snapshot);
    json diag;
    diag["format"] = kCheckpointFormat;
    diag["config_hash"] = config_hash_hex(spec);
    diag["t_end"] = spec.t_end;
    diag["dt"] = spec.dt;
    diag["mass_initial"] = mass0;
    diag["mass_final"] = integrate_state(snapshot.u);
    diag["sup_u"] = snapshot.u.max();
    write_text(stem + ".diagnostics.json", diag.dump(2) + "\n");
    return 0;
}

int run_sweep_mode(const ExperimentSpec& spec) {
    SweepConfig sweep{make_habitat(spec), spec.alpha_lo,
                      spec.alpha_hi,      spec.epsilons,
                      spec.steady_tol,    spec.dt,
                      spec.trait_cells};
    SweepReport report = run_sweep(sweep);

    std::string csv = artifact_header(kSweepFormat, spec);
    csv += "epsilon,sigma0,sigma1,sup_u,uhat_err,profile_err,beta_hat,"
           "mass_frac\n";
    for (const auto& r : report.records) {
        csv += format_double(r.epsilon) + "," + format_double(r.sigma0) + "," +
               format_double(r.sigma1) + "," + format_double(r.sup_u) + "," +
               format_double(r.uhat_err) + "," + format_double(r.profile_err) +
               "," + format_double(r.beta_hat) + "," +
               format_double(r.mass_frac) + "\n";
    }
    write_text(spec.out_dir + "/sweep.csv", csv);
    write_text(spec.out_dir + "/sweep.json",
               sweep_report_json(spec, report).dump(2) + "\n");
    return 0;
}

int run_eigen_curve(const ExperimentSpec& spec) {
    const SpatialField m = make_habitat(spec);
    LogisticSolution theta = solve_theta(spec.alpha_lo, m);
    std::vector<double> alphas = spec.alphas;
    if (alphas.empty()) {
        const int n = 9;
        for (int i = 0; i < n; ++i) {
            alphas.push_back(spec.alpha_lo + (spec.alpha_hi - spec.alpha_lo) *
                                                 i / (n - 1));
        }
    }
    SigmaCurve curve = sigma_star_curve(m, theta, alphas);

    std::string csv = artifact_header("eigen-curve-v1", spec);
    csv += "alpha,sigma,dsigma\n";
    for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
        csv += format_double(curve.alphas[i]) + "," +
               format_double(curve.sigmas[i]) + "," +
               format_double(curve.derivatives[i]) + "\n";
    }
    write_text(spec.out_dir + "/eigen_curve.csv", csv);
    json doc;
    doc["format"] = "eigen-curve-v1";
    doc["config_hash"] = config_hash_hex(spec);
    doc["sigma0"] = curve.sigma0;
    doc["sigma1"] = curve.sigma1;
    doc["alphas"] = curve.alphas;
    doc["sigmas"] = curve.sigmas;
    doc["derivatives"] = curve.derivatives;
    doc["theta_residual"] = theta.residual_inf;
    write_text(spec.out_dir + "/eigen_curve.json", doc.dump(2) + "\n");
    return 0;
}

int run_airy(const ExperimentSpec& spec) {
    double a1 = spec.airy_a1;
    if (!(a1 > 0.0)) {
        ModelConfig config = make_model_config(spec, spec.epsilon);
        TheoryProfile theory = build_theory_profile(make_habitat(spec), config);
        a1 = theory.sigma1_star;
    }
    AiryProfile profile =
        build_eta_star(a1, spec.airy_s_max, spec.airy_samples);

    std::string csv = artifact_header("airy-v1", spec);
    csv += "s,eta\n";
    for (std::size_t i = 0; i < profile.s.size(); ++i) {
        csv += format_double(profile.s[i]) + "," +
               format_double(profile.eta[i]) + "\n";
    }
    write_text(spec.out_dir + "/airy.csv", csv);
    json doc;
    doc["format"] = "airy-v1";
    doc["config_hash"] = config_hash_hex(spec);
    doc["A0"] = find_a0();
    doc["a1"] = profile.a1;
    doc["a0"] = profile.a0;
    doc["s_max"] = profile.s_max;
    doc["normalization"] = profile.normalization;
    doc["tail_bound"] = profile.tail_bound;
    doc["ode_residual_inf"] = profile.ode_residual_inf();
    doc["eta_prime_at_zero"] = profile.eval_prime(0.0);
    write_text(spec.out_dir + "/airy.json", doc.dump(2) + "\n");
    return 0;
}

int run_discrete(const ExperimentSpec& spec) {
    const SpatialField m = make_habitat(spec);
    const int k = static_cast<int>(spec.discrete_alphas.size());
    DiscreteTraitSystem system{
        spec.discrete_alphas,
        tridiagonal_mutation(
            k, (spec.alpha_hi - spec.alpha_lo) / std::max(1, k)),
        spec.discrete_epsilon, m};
    std::vector<SpatialField> u;
    if (spec.discrete_t_end > 0.0) {
        const LogisticSolution base = solve_theta(system.alphas[0], m);
        std::vector<SpatialField> u0(
            static_cast<std::size_t>(k),
            SpatialField(m.grid(), 0.0));
        for (int i = 0; i < k; ++i) {
            u0[i] = SpatialField(m.grid(), base.theta.values() / k);
        }
        u = evolve_discrete(system, u0, spec.discrete_t_end,
                            spec.discrete_dt);
    } else {
        u = steady_discrete(system, spec.discrete_tol, spec.discrete_dt);
    }
    const std::vector<double> masses = species_masses(system, u);
    double total = 0.0;
    for (double q : masses) total += q;

    std::string csv = artifact_header(kSweepFormat, spec);
    csv += "epsilon,species,alpha,mass,mass_frac,sup_u\n";
    for (int i = 0; i < k; ++i) {
        csv += format_double(spec.discrete_epsilon) + "," +
               std::to_string(i) + "," +
               format_double(system.alphas[i]) + "," +
               format_double(masses[i]) + "," +
               format_double(masses[i] / total) + "," +
               format_double(u[i].max()) + "\n";
    }
    write_text(spec.out_dir + "/discrete.csv", csv);
    json doc;
    doc["format"] = kSweepFormat;
    doc["config_hash"] = config_hash_hex(spec);
    doc["epsilon"] = spec.discrete_epsilon;
    doc["alphas"] = system.alphas;
    doc["masses"] = masses;
    doc["residual"] = discrete_residual(system, u);
    write_text(spec.out_dir + "/discrete.json", doc.dump(2) + "\n");
    return 0;
}

}  // namespace

int run(const ExperimentSpec& spec) {
    std::error_code ec;
    std::filesystem::create_directories(spec.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + spec.out_dir);
    if (spec.mode == "steady") return run_steady(spec);
    if (spec.mode == "evolve") return run_evolve(spec);
    if (spec.mode == "sweep") return run_sweep_mode(spec);
    if (spec.mode == "eigen-curve") return run_eigen_curve(spec);
    if (spec.mode == "airy") return run_airy(spec);
    if (spec.mode == "discrete") return run_discrete(spec);
    throw ConfigError("mode: unknown mode " + spec.mode);
}

}  // namespace dispersal
