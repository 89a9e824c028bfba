#include "culsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "culsim/attitude.hpp"

namespace culsim {

std::string_view to_string(ChangeClass c) {
    switch (c) {
        case ChangeClass::decrease_both: return "decrease_both";
        case ChangeClass::increase_inclusive_only: return "increase_inclusive_only";
        case ChangeClass::increase_both: return "increase_both";
        case ChangeClass::increase_exclusive_only: return "increase_exclusive_only";
        case ChangeClass::no_change: return "no_change";
    }
    return "unknown";
}

AttitudeMatrix attitude_matrix(const Population& population,
                               const Grid& grid,
                               const ModelParams& params,
                               int threads) {
    // Empty cells stay absent (count == 0) rather than raising; degenerate
    // populations are legitimate inputs here.
    return pairwise_attitude_stats(population, grid, params, threads);
}

std::vector<double> mean_attitude_toward_group(const ScenarioResult& result,
                                               int target_group,
                                               int threads) {
    if (result.snapshots.empty()) throw std::invalid_argument("scenario result has no snapshots");
    std::vector<double> series;
    series.reserve(result.snapshots.size());
    for (const Population& snap : result.snapshots) {
        if (snap.count_in_group(target_group) == 0) {
            throw std::invalid_argument("target group is empty");
        }
        const Grid grid(snap.params.d);
        const auto per_agent = per_agent_mean_toward_group(snap, target_group, grid, snap.params, threads);
        double sum = 0.0;
        long long n = 0;
        for (const auto& m : per_agent) {
            if (m.count == 0) continue;
            sum += m.mean;
            ++n;
        }
        if (n == 0) throw std::invalid_argument("no agent has a target in the group");
        series.push_back(sum / n);
    }
    return series;
}

namespace {

ChangeClass classify_pair(std::optional<double> d_inc, std::optional<double> d_exc, double tau) {
    const bool inc_up = d_inc.has_value() && *d_inc > tau;
    const bool exc_up = d_exc.has_value() && *d_exc > tau;
    const bool inc_flat = !d_inc.has_value() || std::abs(*d_inc) <= tau;
    const bool exc_flat = !d_exc.has_value() || std::abs(*d_exc) <= tau;
    if (inc_up && exc_up) return ChangeClass::increase_both;
    if (inc_up) return ChangeClass::increase_inclusive_only;
    if (exc_up) return ChangeClass::increase_exclusive_only;
    if (inc_flat && exc_flat) return ChangeClass::no_change;
    return ChangeClass::decrease_both;
}

struct AxisMeans {
    std::vector<MeanToward> inclusive;
    std::vector<MeanToward> exclusive;
};

AxisMeans axis_means(const Population& snap, int group, bool inc_present, bool exc_present, int threads) {
    const Grid grid(snap.params.d);
    AxisMeans out;
    if (inc_present) {
        out.inclusive = per_agent_mean_toward_group_kind(snap, group, ProtoKind::inclusive,
                                                         grid, snap.params, threads);
    }
    if (exc_present) {
        out.exclusive = per_agent_mean_toward_group_kind(snap, group, ProtoKind::exclusive,
                                                         grid, snap.params, threads);
    }
    return out;
}

std::vector<ChangeClass> classify_between(const AxisMeans& from,
                                          const AxisMeans& to,
                                          std::size_t n_agents,
                                          double tau) {
    std::vector<ChangeClass> classes(n_agents, ChangeClass::no_change);
    for (std::size_t i = 0; i < n_agents; ++i) {
        std::optional<double> d_inc;
        std::optional<double> d_exc;
        if (!from.inclusive.empty() && from.inclusive[i].count > 0 && to.inclusive[i].count > 0) {
            d_inc = to.inclusive[i].mean - from.inclusive[i].mean;
        }
        if (!from.exclusive.empty() && from.exclusive[i].count > 0 && to.exclusive[i].count > 0) {
            d_exc = to.exclusive[i].mean - from.exclusive[i].mean;
        }
        classes[i] = classify_pair(d_inc, d_exc, tau);
    }
    return classes;
}

ChangeDistribution distribution_of(const std::vector<std::pair<const Agent*, ChangeClass>>& entries,
                                   const Worldviews& worldviews) {
    ChangeDistribution dist;
    struct Key {
        int group;
        ProtoKind kind;
    };
    std::vector<Key> keys;
    for (int g = 0; g < worldviews.size(); ++g) {
        keys.push_back({g, ProtoKind::inclusive});
        keys.push_back({g, ProtoKind::exclusive});
    }
    std::array<long long, kChangeClassCount> total_counts{};
    for (const Key& key : keys) {
        std::array<long long, kChangeClassCount> counts{};
        long long n = 0;
        for (const auto& [agent, cls] : entries) {
            if (agent->group != key.group || agent->kind != key.kind) continue;
            counts[static_cast<std::size_t>(cls)] += 1;
            ++n;
        }
        if (n == 0) continue;
        ChangeDistribution::Row row;
        row.group = key.group;
        row.kind = key.kind;
        row.count = n;
        for (int c = 0; c < kChangeClassCount; ++c) {
            row.percent[static_cast<std::size_t>(c)] =
                100.0 * static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(n);
        }
        dist.rows.push_back(row);
    }
    for (const auto& [agent, cls] : entries) {
        (void)agent;
        total_counts[static_cast<std::size_t>(cls)] += 1;
        dist.total += 1;
    }
    if (dist.total > 0) {
        for (int c = 0; c < kChangeClassCount; ++c) {
            dist.percent[static_cast<std::size_t>(c)] =
                100.0 * static_cast<double>(total_counts[static_cast<std::size_t>(c)])
                / static_cast<double>(dist.total);
        }
    }
    return dist;
}

}  // namespace

ChangeAnalysis classify_changes(const ScenarioResult& result, double tau, int threads) {
    if (result.snapshots.size() < 2) {
        throw std::invalid_argument("change classification needs at least 2 snapshots");
    }
    if (!(tau >= 0.0)) throw std::invalid_argument("tau must be >= 0");
    const Population& initial = result.snapshots.front();
    const int group = result.spec.terrorist.main_worldview;

    ChangeAnalysis out;
    out.inclusive_axis_present = initial.count_in_group_kind(group, ProtoKind::inclusive) > 0;
    out.exclusive_axis_present = initial.count_in_group_kind(group, ProtoKind::exclusive) > 0;
    if (!out.inclusive_axis_present && !out.exclusive_axis_present) {
        throw std::invalid_argument("threatened group has no members to classify against");
    }

    std::vector<AxisMeans> per_snapshot;
    per_snapshot.reserve(result.snapshots.size());
    for (const Population& snap : result.snapshots) {
        per_snapshot.push_back(axis_means(snap, group, out.inclusive_axis_present,
                                          out.exclusive_axis_present, threads));
    }

    const std::size_t n_agents = initial.agents.size();
    out.per_agent = classify_between(per_snapshot.front(), per_snapshot.back(), n_agents, tau);

    std::vector<std::pair<const Agent*, ChangeClass>> final_entries;
    final_entries.reserve(n_agents);
    for (std::size_t i = 0; i < n_agents; ++i) {
        final_entries.emplace_back(&initial.agents[i], out.per_agent[i]);
    }
    out.per_agent_dist = distribution_of(final_entries, initial.worldviews);

    std::vector<std::pair<const Agent*, ChangeClass>> time_entries;
    time_entries.reserve(n_agents * (result.snapshots.size() - 1));
    for (std::size_t t = 1; t < result.snapshots.size(); ++t) {
        const auto classes = classify_between(per_snapshot.front(), per_snapshot[t], n_agents, tau);
        for (std::size_t i = 0; i < n_agents; ++i) {
            time_entries.emplace_back(&initial.agents[i], classes[i]);
        }
    }
    out.per_agent_time_dist = distribution_of(time_entries, initial.worldviews);
    return out;
}

ConditionProfile condition_profile(const Population& population,
                                   const Grid& grid,
                                   const ModelParams& params,
                                   int worldview,
                                   int threads) {
    const int g = population.worldviews.size();
    if (worldview < 0 || worldview >= g) throw std::invalid_argument("worldview out of range");
    for (int k = 0; k < g; ++k) {
        if (population.count_in_group(k) == 0) {
            throw std::invalid_argument("group " + population.worldviews.label(k) + " is empty");
        }
    }

    const auto attitudes = per_agent_mean_toward_group(population, worldview, grid, params, threads);

    ConditionProfile profile;
    profile.worldview = worldview;
    profile.groups.assign(static_cast<std::size_t>(g), {});
    for (std::size_t i = 0; i < population.agents.size(); ++i) {
        const Agent& a = population.agents[i];
        const AcceptanceSegment& seg = a.identity.segment(worldview);
        auto add = [&](ConditionProfile::GroupStats& s) {
            s.count += 1;
            s.mean_position += seg.position;
            s.mean_margin_low += seg.margin_low();
            s.mean_margin_high += seg.margin_high();
            s.mean_attitude += attitudes[i].count > 0 ? attitudes[i].mean : 0.0;
        };
        add(profile.groups[static_cast<std::size_t>(a.group)]);
        add(profile.population);
    }
    auto finalize = [](ConditionProfile::GroupStats& s) {
        if (s.count == 0) return;
        s.mean_position /= static_cast<double>(s.count);
        s.mean_margin_low /= static_cast<double>(s.count);
        s.mean_margin_high /= static_cast<double>(s.count);
        s.mean_attitude /= static_cast<double>(s.count);
    };
    for (auto& s : profile.groups) finalize(s);
    finalize(profile.population);

    profile.flags.assign(static_cast<std::size_t>(g), {});
    profile.favorable = true;
    for (int k = 0; k < g; ++k) {
        const auto& s = profile.groups[static_cast<std::size_t>(k)];
        auto& f = profile.flags[static_cast<std::size_t>(k)];
        f.margin_high_larger = s.mean_margin_high > profile.population.mean_margin_high;
        f.margin_high_smaller = s.mean_margin_high < profile.population.mean_margin_high;
        f.margin_low_larger = s.mean_margin_low > profile.population.mean_margin_low;
        f.position_lower = s.mean_position < profile.population.mean_position;
        f.attitude_higher = s.mean_attitude > profile.population.mean_attitude;
        if (k == worldview) {
            profile.favorable = profile.favorable && f.margin_high_larger && f.margin_low_larger
                                && f.position_lower;
        } else {
            profile.favorable = profile.favorable && f.margin_high_smaller && f.margin_low_larger
                                && f.attitude_higher;
        }
    }
    return profile;
}

}  // namespace culsim
