#pragma once

#include <array>
#include <optional>
#include <vector>

#include "culsim/threat.hpp"

namespace culsim {

// Mean interpersonal attitudes per ordered group pair, with the target axis
// additionally split by prototype kind. Cells without any agent pair are
// absent (count == 0).
using AttitudeMatrix = PairwiseStats;

AttitudeMatrix attitude_matrix(const Population& population,
                               const Grid& grid,
                               const ModelParams& params,
                               int threads = 0);

// Mean attitude about one group over a scenario: for every snapshot, the
// mean over all agents i of agent i's mean attitude about the group members
// j != i. Agents without any target (the group's sole member) are left out
// of the outer mean.
std::vector<double> mean_attitude_toward_group(const ScenarioResult& result,
                                               int target_group,
                                               int threads = 0);

// Sign pattern of an agent's attitude change toward the inclusive and the
// exclusive members of the threatened group between two snapshots.
enum class ChangeClass {
    decrease_both,
    increase_inclusive_only,
    increase_both,
    increase_exclusive_only,
    no_change,
};
inline constexpr int kChangeClassCount = 5;
std::string_view to_string(ChangeClass c);

struct ChangeDistribution {
    struct Row {
        int group = 0;
        ProtoKind kind = ProtoKind::inclusive;
        long long count = 0;
        std::array<double, kChangeClassCount> percent{};  // sums to 100 per row
    };
    std::vector<Row> rows;
    long long total = 0;
    std::array<double, kChangeClassCount> percent{};  // over all classified entries
};

struct ChangeAnalysis {
    std::vector<ChangeClass> per_agent;     // final snapshot vs initial
    ChangeDistribution per_agent_dist;      // over agents
    ChangeDistribution per_agent_time_dist; // over (agent, t) pairs, t vs 0
    bool inclusive_axis_present = false;
    bool exclusive_axis_present = false;
};

// Classifies every agent's attitude change toward the threatened group's
// inclusive and exclusive members, |delta| <= tau counting as no change on
// an axis. When one kind is absent from the group the classification
// degrades to the single present axis. Distributions are reported both over
// agents (final vs initial) and pooled over (agent, t) pairs.
ChangeAnalysis classify_changes(const ScenarioResult& result, double tau, int threads = 0);

// Per-group statistics of the acceptance segments on one worldview plus the
// mean attitude about that worldview (the attitude about the group members'
// segments of that worldview), with strict comparisons against the
// whole-population mean of the same statistic.
struct ConditionProfile {
    struct GroupStats {
        long long count = 0;
        double mean_position = 0.0;
        double mean_margin_low = 0.0;
        double mean_margin_high = 0.0;
        double mean_attitude = 0.0;  // toward the worldview's group members
    };
    struct Flags {
        bool margin_high_larger = false;
        bool margin_high_smaller = false;
        bool margin_low_larger = false;
        bool position_lower = false;
        bool attitude_higher = false;
    };

    int worldview = 0;
    std::vector<GroupStats> groups;
    GroupStats population;
    std::vector<Flags> flags;

    // True when the profile matches the favorable pattern: the worldview's
    // own group has the larger margins and the lower position, and every
    // other group has a smaller high margin, a larger low margin and a
    // higher attitude than the population mean.
    bool favorable = false;
};

ConditionProfile condition_profile(const Population& population,
                                   const Grid& grid,
                                   const ModelParams& params,
                                   int worldview = 0,
                                   int threads = 0);

}  // namespace culsim
