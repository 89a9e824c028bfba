#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "culsim/synthesis.hpp"
#include "culsim/threat.hpp"

namespace culsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A documented example prototype set used as the default population and in
// tests. Hand-constructed; not survey data.
std::vector<Prototype> example_prototypes(const Worldviews& worldviews);

// Full run configuration with defaults applied. Loaded from a `key = value`
// file; unknown keys are rejected.
struct RunConfig {
    ModelParams params;

    int n_messages = 7;
    bool record_trace = true;
    int terrorist_group = 0;
    double terrorist_positive = 1.0;
    double terrorist_negative = -1.0;

    PopulationSpec popspec;  // defaults: n=1000, equal shares, x=0.5, example prototypes
    std::optional<std::filesystem::path> population_path;  // overrides popspec when set
    std::optional<std::filesystem::path> reference_path;   // synthesize input
    std::optional<std::filesystem::path> run_path;         // analyze input

    SearchConfig search;

    std::string sweep_parameter = "x.M";
    std::vector<double> sweep_values = {0.0, 0.25, 0.5, 0.75, 1.0};

    double tau = 1e-9;  // change-classification tolerance

    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    int threads = 0;
};

RunConfig default_config();

// Parses and validates config text. Relative paths resolve against
// base_dir. Referenced files must exist.
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

// The semantic part of a resolved configuration: everything that shapes the
// outputs, rendered in a fixed key order. Execution details (thread count,
// output directory) are excluded so they cannot change artifact bytes.
std::string semantic_config_text(const RunConfig& config);

// FNV-1a hash of the semantic config text, as a hex string.
std::string config_hash(const RunConfig& config);

}  // namespace culsim
