#pragma once

#include <filesystem>

#include "culsim/config.hpp"

namespace culsim {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Output directory for a run: the explicit path when given, otherwise
// $CULSIM_OUT_ROOT (or ./runs) plus a deterministic name derived from the
// subcommand, the config hash and the seed.
std::filesystem::path resolve_out_dir(const RunConfig& config, const std::string& subcommand);

void run_simulate(const RunConfig& config, const std::filesystem::path& out_dir);
void run_synthesize(const RunConfig& config, const std::filesystem::path& out_dir);
void run_analyze(const RunConfig& config, const std::filesystem::path& out_dir);
void run_sweep(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace culsim
