#pragma once

#include <string_view>
#include <vector>

#include "culsim/model_types.hpp"

namespace culsim {

// Prototype provenance of an agent: inclusive identities keep near-zero or
// positive segments toward the other worldviews, exclusive identities are
// positive only toward their own group's worldview.
enum class ProtoKind { inclusive, exclusive };

std::string_view to_string(ProtoKind kind);
ProtoKind proto_kind_from_string(std::string_view text);

struct Agent {
    int id = 0;
    int group = 0;  // worldview index of the agent's cultural group
    ProtoKind kind = ProtoKind::inclusive;
    CulturalIdentity identity;
};

struct Population {
    Worldviews worldviews;
    ModelParams params;
    std::vector<Agent> agents;

    int size() const { return static_cast<int>(agents.size()); }
    long long count_in_group(int group) const;
    long long count_in_group_kind(int group, ProtoKind kind) const;
    void require_valid() const;
};

struct PairwiseCell {
    long long count = 0;
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation

    bool present() const { return count > 0; }
};

// Interpersonal-attitude statistics over all ordered agent pairs (i, j),
// i != j, grouped by (observer group, target group) and additionally by the
// target's prototype kind. Cells with no pair keep count == 0.
struct PairwiseStats {
    int n_groups = 0;
    std::vector<PairwiseCell> group;       // [observer * n_groups + target]
    std::vector<PairwiseCell> group_kind;  // [(observer * n_groups + target) * 2 + kind]

    const PairwiseCell& at(int observer, int target) const {
        return group.at(static_cast<std::size_t>(observer * n_groups + target));
    }
    const PairwiseCell& at(int observer, int target, ProtoKind kind) const {
        return group_kind.at(static_cast<std::size_t>((observer * n_groups + target) * 2
                                                      + (kind == ProtoKind::exclusive ? 1 : 0)));
    }
};

PairwiseStats pairwise_attitude_stats(const Population& population,
                                      const Grid& grid,
                                      const ModelParams& params,
                                      int threads = 0);

// Per-agent mean attitude about the members of one group (self excluded).
// Agents without any target in the group get count 0.
struct MeanToward {
    double mean = 0.0;
    long long count = 0;
};
std::vector<MeanToward> per_agent_mean_toward_group(const Population& population,
                                                    int target_group,
                                                    const Grid& grid,
                                                    const ModelParams& params,
                                                    int threads = 0);

// Same restricted to targets of one prototype kind.
std::vector<MeanToward> per_agent_mean_toward_group_kind(const Population& population,
                                                         int target_group,
                                                         ProtoKind kind,
                                                         const Grid& grid,
                                                         const ModelParams& params,
                                                         int threads = 0);

}  // namespace culsim
