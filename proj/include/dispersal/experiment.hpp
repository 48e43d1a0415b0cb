#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dispersal/asymptotics.hpp"
#include "dispersal/discrete.hpp"
#include "dispersal/solver.hpp"

namespace dispersal {

inline constexpr const char* kCheckpointFormat = "dispersal-v1";
inline constexpr const char* kSweepFormat = "sweep-v1";

/// Batch experiment description, parsed from the JSON config documented in
/// the README. Field defaults reproduce the desk-scale setup.
struct ExperimentSpec {
    std::string mode = "steady";  // steady|evolve|sweep|eigen-curve|airy|discrete

    int dimension = 1;
    std::vector<double> extent{1.0};
    std::vector<int> cells{96};

    double alpha_lo = 0.5;
    double alpha_hi = 2.0;
    int trait_cells = 0;  // 0 = resolve the layer automatically

    std::string habitat_preset = "cosine";  // one|cosine|two-bump|samples
    double habitat_base = 1.0;
    double habitat_amplitude = 0.5;
    std::vector<double> habitat_samples;

    double epsilon = 0.05;
    std::vector<double> epsilons{0.08, 0.04, 0.02, 0.01};

    double t_end = 100.0;
    double dt = 0.4;
    double steady_tol = 1e-9;
    bool trivial_mode = false;
    unsigned seed = 0;

    std::vector<double> alphas;  // eigen-curve nodes; empty = 9 even nodes

    double airy_a1 = 0.0;  // 0 = derive from the habitat theory chain
    double airy_s_max = 0.0;
    int airy_samples = 4001;

    std::vector<double> discrete_alphas{0.5, 1.0, 2.0};
    double discrete_epsilon = 0.05;
    double discrete_t_end = 0.0;  // 0 = run to steady state
    double discrete_dt = 0.05;
    double discrete_tol = 1e-9;

    std::string out_dir = ".";
};

/// Parses and validates a config document; ConfigError messages carry the
/// offending field path.
ExperimentSpec parse_spec(const nlohmann::json& doc);
ExperimentSpec load_spec(const std::string& path);

/// Canonical JSON form of a spec (key-sorted); hashing this gives the config
/// hash embedded in every artifact.
nlohmann::json spec_to_json(const ExperimentSpec& spec);
std::uint64_t config_hash(const ExperimentSpec& spec);
std::string config_hash_hex(const ExperimentSpec& spec);

/// Grid and habitat realization of a spec.
SpatialGrid make_spatial_grid(const ExperimentSpec& spec);
SpatialField make_habitat(const ExperimentSpec& spec);
ModelConfig make_model_config(const ExperimentSpec& spec, double epsilon);

/// Steady-state container io, format "dispersal-v1".
void write_checkpoint(const std::string& path, const ExperimentSpec& spec,
                      const ModelConfig& config, const SteadyState& state);
struct Checkpoint {
    ModelConfig config;
    SteadyState state;
};
Checkpoint load_checkpoint(const std::string& path);

/// Recomputes residual and invariants of a stored steady state; returns the
/// violation messages (empty = healthy).
std::vector<std::string> check_checkpoint(const std::string& path,
                                          unsigned seed = 0);

/// Dispatches one experiment; writes artifacts under spec.out_dir and
/// returns a process exit status (0 = success). Solver failures and
/// invariant violations surface as dispersal::Error exceptions.
int run(const ExperimentSpec& spec);

}  // namespace dispersal
