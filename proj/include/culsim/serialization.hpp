#pragma once

#include <filesystem>
#include <string>

#include "culsim/synthesis.hpp"
#include "culsim/threat.hpp"

namespace culsim {

// Agent table: id,group,kind, then position/lower/upper per worldview.
std::string population_to_csv(const Population& population);
Population population_from_csv(const std::string& text, const ModelParams& params);
void save_population_csv(const Population& population, const std::filesystem::path& path);
Population load_population_csv(const std::filesystem::path& path, const ModelParams& params);

// Reference indicators: one row per ordered group pair.
std::string indicators_to_csv(const IndicatorMatrix& matrix, const Worldviews& worldviews);
IndicatorMatrix indicators_from_csv(const std::string& text, const Worldviews& worldviews);
void save_indicators_csv(const IndicatorMatrix& matrix,
                         const Worldviews& worldviews,
                         const std::filesystem::path& path);
IndicatorMatrix load_indicators_csv(const std::filesystem::path& path, const Worldviews& worldviews);

// Threat trace; group and prototype labels come from the initial population.
std::string trace_to_csv(const std::vector<ThreatUpdateRecord>& trace, const Population& initial);

// Structured-text round trips for population specs and fit results.
std::string popspec_to_text(const PopulationSpec& spec);
PopulationSpec popspec_from_text(const std::string& text);
std::string fitresult_to_text(const FitResult& result, const PopulationSpec& base);
FitResult fitresult_from_text(const std::string& text);

}  // namespace culsim
