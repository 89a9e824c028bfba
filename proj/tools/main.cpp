#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "culsim/runner.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Run configuration file (key = value lines)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", flags.out_dir, "Output directory (default: $CULSIM_OUT_ROOT/<name>)");
    cmd->add_option_function<std::uint64_t>(
           "--seed",
           [&flags](const std::uint64_t v) {
               flags.seed = v;
               flags.seed_set = true;
           },
           "Master seed; overrides the config");
    cmd->add_option("--threads", flags.threads, "Worker threads (0 = hardware)");
}

culsim::RunConfig resolve_config(const CommonFlags& flags) {
    culsim::RunConfig cfg = flags.config_path.empty() ? culsim::default_config()
                                                      : culsim::load_config(flags.config_path);
    if (flags.seed_set) {
        cfg.seed = flags.seed;
        cfg.seed_set = true;
    }
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.threads >= 0) {
        cfg.threads = flags.threads;
        cfg.search.threads = flags.threads;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agent-based simulation of cultural-identity dynamics under threat messages"};
    app.require_subcommand(1);

    CommonFlags simulate_flags;
    CommonFlags synthesize_flags;
    CommonFlags analyze_flags;
    CommonFlags sweep_flags;
    std::string run_dir;

    CLI::App* simulate = app.add_subcommand(
        "simulate", "Build or load a population and run the threat-message scenario");
    add_common(simulate, simulate_flags);

    CLI::App* synthesize = app.add_subcommand(
        "synthesize", "Calibrate prototype populations against reference indicators");
    add_common(synthesize, synthesize_flags);

    CLI::App* analyze = app.add_subcommand(
        "analyze", "Analyze a stored simulate run (attitude matrices, change classes, conditions)");
    add_common(analyze, analyze_flags);
    analyze->add_option("--run", run_dir, "Stored simulate output directory")
        ->check(CLI::ExistingDirectory);

    CLI::App* sweep = app.add_subcommand(
        "sweep", "Re-run the scenario over a grid of inclusive-fraction values");
    add_common(sweep, sweep_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            const culsim::RunConfig cfg = resolve_config(simulate_flags);
            const auto out = culsim::resolve_out_dir(cfg, "simulate");
            culsim::run_simulate(cfg, out);
            std::cout << out.string() << "\n";
        } else if (synthesize->parsed()) {
            const culsim::RunConfig cfg = resolve_config(synthesize_flags);
            const auto out = culsim::resolve_out_dir(cfg, "synthesize");
            culsim::run_synthesize(cfg, out);
            std::cout << out.string() << "\n";
        } else if (analyze->parsed()) {
            culsim::RunConfig cfg = resolve_config(analyze_flags);
            if (!run_dir.empty()) cfg.run_path = run_dir;
            const auto out = culsim::resolve_out_dir(cfg, "analyze");
            culsim::run_analyze(cfg, out);
            std::cout << out.string() << "\n";
        } else if (sweep->parsed()) {
            const culsim::RunConfig cfg = resolve_config(sweep_flags);
            const auto out = culsim::resolve_out_dir(cfg, "sweep");
            culsim::run_sweep(cfg, out);
            std::cout << out.string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
