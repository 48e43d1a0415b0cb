#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "dispersal/experiment.hpp"

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::string check_path;
    int threads = 1;
    unsigned seed = 0;
    bool have_seed = false;
};

dispersal::ExperimentSpec resolve_spec(const GlobalArgs& args,
                                       const std::string& mode) {
    dispersal::ExperimentSpec spec;
    if (!args.config_path.empty()) {
        spec = dispersal::load_spec(args.config_path);
    }
    if (!mode.empty()) spec.mode = mode;
    if (!args.out_dir.empty()) spec.out_dir = args.out_dir;
    if (args.have_seed) spec.seed = args.seed;
    return spec;
}

int run_check(const std::string& path, unsigned seed) {
    const auto report = dispersal::check_checkpoint(path, seed);
    if (report.empty()) {
        std::printf("[PASS] %s: all invariants hold\n", path.c_str());
        return 0;
    }
    for (const auto& line : report) {
        std::printf("[FAIL] %s: %s\n", path.c_str(), line.c_str());
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "dispersal: steady states and scaling diagnostics of a "
        "mutation-selection model for the evolution of random dispersal"};
    app.require_subcommand(0, 1);

    GlobalArgs args;
    app.add_option("--config", args.config_path,
                   "JSON experiment configuration");
    app.add_option("--out", args.out_dir, "output directory");
    app.add_option("--threads", args.threads,
                   "upper bound on worker threads (runs are serial and "
                   "deterministic)")
        ->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", args.seed,
                                    "seed for randomized invariant probes");
    app.add_option("--check", args.check_path,
                   "verify the invariants of a steady-state checkpoint");

    std::string picked_mode;
    for (const char* mode :
         {"steady", "evolve", "sweep", "eigen-curve", "airy", "discrete"}) {
        auto* sub = app.add_subcommand(
            mode, std::string("run the ") + mode + " experiment");
        sub->callback([&picked_mode, mode] { picked_mode = mode; });
    }
    auto* check_sub =
        app.add_subcommand("check", "verify a steady-state checkpoint");
    std::string check_arg;
    check_sub->add_option("checkpoint", check_arg, "checkpoint path")
        ->required();
    check_sub->callback([&args, &check_arg] { args.check_path = check_arg; });

    CLI11_PARSE(app, argc, argv);
    args.have_seed = seed_opt->count() > 0;

    try {
        if (!args.check_path.empty()) {
            return run_check(args.check_path, args.seed);
        }
        if (picked_mode.empty() && args.config_path.empty()) {
            std::cerr << app.help() << std::endl;
            return 2;
        }
        const dispersal::ExperimentSpec spec = resolve_spec(args, picked_mode);
        return dispersal::run(spec);
    } catch (const dispersal::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 3;
    }
}
