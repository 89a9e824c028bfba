#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "culsim/population.hpp"

namespace culsim {

// An extreme identity broadcast with each message: a very positive most
// acceptable position for the main worldview, very negative ones for the
// others, and every margin of width epsilon (clamped into [-1, 1]).
struct TerroristProfile {
    CulturalIdentity identity;
    int main_worldview = 0;
};

TerroristProfile make_terrorist(int n_worldviews,
                                int main_worldview,
                                const ModelParams& params,
                                double positive = 1.0,
                                double negative = -1.0);

enum class BoundSide { lower, upper };
std::string_view to_string(BoundSide side);

// One margin modification: which bound of which worldview segment moved,
// triggered by the aggressor's attitude omega_qi about the agent.
struct ThreatUpdateRecord {
    int agent_id = -1;
    int message_index = 0;
    double omega_qi = 0.0;
    double mu = 0.0;
    int worldview = 0;
    BoundSide side = BoundSide::upper;
    double bound_before = 0.0;
    double bound_after = 0.0;
};

struct ScenarioSpec {
    int n_messages = 7;
    TerroristProfile terrorist;
    bool record_trace = true;
};

// Reaction intensity: 0 for a non-negative attitude (the agent is not
// scared), otherwise alpha * (e^w - 1)/(e^w + 1), a strictly negative
// contraction factor bounded below by -alpha * tanh(1/2).
double reaction_intensity(double omega_qi, const ModelParams& params);

struct ThreatResult {
    CulturalIdentity identity;
    std::vector<ThreatUpdateRecord> records;  // empty when not threatened
};

// Applies one threat message to one agent: computes the aggressor's
// attitude about the agent and, when negative, moves the bound closest to
// the aggressor's position toward the agent's own position. The targeted
// margin width w contracts as w' - eps = (1 + mu)(w - eps), so widths never
// drop below eps and width == eps is a fixed point. Only the aggressor's
// main worldview is touched unless params.threat_all_worldviews is set.
ThreatResult apply_threat(const CulturalIdentity& agent,
                          const TerroristProfile& terrorist,
                          const Grid& grid,
                          const ModelParams& params);

// One synchronous message: every agent reacts to the same pre-step
// population state, then all updates are committed. The result does not
// depend on agent order or thread count.
std::pair<Population, std::vector<ThreatUpdateRecord>> scenario_step(const Population& population,
                                                                     const ScenarioSpec& spec,
                                                                     const Grid& grid,
                                                                     const ModelParams& params,
                                                                     int threads = 0,
                                                                     int message_index = 1);

struct ScenarioResult {
    ScenarioSpec spec;
    std::vector<Population> snapshots;     // t = 0 .. n_messages
    std::vector<ThreatUpdateRecord> trace;
    std::vector<PairwiseStats> summaries;  // one per snapshot
};

ScenarioResult run_scenario(const Population& population,
                            const ScenarioSpec& spec,
                            const Grid& grid,
                            const ModelParams& params,
                            int threads = 0);

}  // namespace culsim
