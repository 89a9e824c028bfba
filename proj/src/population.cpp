#include "culsim/population.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "culsim/attitude.hpp"
#include "culsim/parallel.hpp"

namespace culsim {

std::string_view to_string(ProtoKind kind) {
    return kind == ProtoKind::inclusive ? "inclusive" : "exclusive";
}

ProtoKind proto_kind_from_string(std::string_view text) {
    if (text == "inclusive") return ProtoKind::inclusive;
    if (text == "exclusive") return ProtoKind::exclusive;
    throw std::invalid_argument("unknown prototype kind: " + std::string(text));
}

long long Population::count_in_group(int group) const {
    long long n = 0;
    for (const auto& a : agents) n += (a.group == group) ? 1 : 0;
    return n;
}

long long Population::count_in_group_kind(int group, ProtoKind kind) const {
    long long n = 0;
    for (const auto& a : agents) n += (a.group == group && a.kind == kind) ? 1 : 0;
    return n;
}

void Population::require_valid() const {
    params.require_valid();
    const int k = worldviews.size();
    if (k < 2) throw std::invalid_argument("population needs at least 2 worldviews");
    for (const auto& a : agents) {
        if (a.group < 0 || a.group >= k) throw std::invalid_argument("agent group out of range");
        if (a.identity.size() != k) throw std::invalid_argument("agent identity does not cover all worldviews");
        require_initialized(a.identity, params.epsilon);
    }
}

namespace {

// Shared precomputation for all pairwise passes: one observer table per
// agent plus the interior grid range of every agent's segments.
struct PairContext {
    std::vector<ObserverTable> tables;
    std::vector<std::pair<int, int>> ranges;  // [agent * K + worldview]
    int n = 0;
    int k = 0;

    PairContext(const Population& pop, const Grid& grid, int threads) {
        n = pop.size();
        k = pop.worldviews.size();
        tables.reserve(static_cast<std::size_t>(n));
        std::vector<std::unique_ptr<ObserverTable>> built(static_cast<std::size_t>(n));
        parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
            built[i] = std::make_unique<ObserverTable>(pop.agents[i].identity, grid);
        });
        for (auto& t : built) tables.push_back(std::move(*t));

        ranges.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
        for (int i = 0; i < n; ++i) {
            for (int w = 0; w < k; ++w) {
                const auto r = grid.interior_range(pop.agents[i].identity.segment(w));
                if (r.first >= r.second) {
                    throw DegenerateTargetSegment("agent " + std::to_string(pop.agents[i].id)
                                                  + " has a segment with no interior grid point");
                }
                ranges[static_cast<std::size_t>(i) * static_cast<std::size_t>(k)
                       + static_cast<std::size_t>(w)] = r;
            }
        }
    }

    double attitude(int observer, int target, const ModelParams& params) const {
        const ObserverTable& table = tables[static_cast<std::size_t>(observer)];
        double sum = 0.0;
        for (int w = 0; w < k; ++w) {
            const auto& r = ranges[static_cast<std::size_t>(target) * static_cast<std::size_t>(k)
                                   + static_cast<std::size_t>(w)];
            sum += table.attitude_over_range(w, r.first, r.second, params);
        }
        return sum / k;
    }
};

// Streaming mean/M2 with a stable pairwise combine, so near-constant values
// produce a near-zero standard deviation instead of cancellation noise.
struct Welford {
    long long count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        count += 1;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }
    void combine(const Welford& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double delta = other.mean - mean;
        const long long total = count + other.count;
        mean += delta * static_cast<double>(other.count) / static_cast<double>(total);
        m2 += other.m2 + delta * delta * static_cast<double>(count)
              * static_cast<double>(other.count) / static_cast<double>(total);
        count = total;
    }
    PairwiseCell cell() const {
        PairwiseCell c;
        c.count = count;
        c.mean = count > 0 ? mean : 0.0;
        const double var = count > 0 ? m2 / static_cast<double>(count) : 0.0;
        c.stddev = std::sqrt(var > 0.0 ? var : 0.0);
        return c;
    }
};

}  // namespace

PairwiseStats pairwise_attitude_stats(const Population& population,
                                      const Grid& grid,
                                      const ModelParams& params,
                                      int threads) {
    const PairContext ctx(population, grid, threads);
    const int n = ctx.n;
    const int g = population.worldviews.size();
    const std::size_t cells = static_cast<std::size_t>(g) * static_cast<std::size_t>(g) * 2;

    // Per-observer partial accumulators, combined afterwards in index order
    // so the result does not depend on the thread schedule.
    std::vector<std::vector<Welford>> partial(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        std::vector<Welford> local(cells);
        for (int j = 0; j < n; ++j) {
            if (static_cast<int>(i) == j) continue;
            const double w = ctx.attitude(static_cast<int>(i), j, params);
            const Agent& tgt = population.agents[static_cast<std::size_t>(j)];
            const std::size_t cell =
                static_cast<std::size_t>((population.agents[i].group * g + tgt.group) * 2
                                         + (tgt.kind == ProtoKind::exclusive ? 1 : 0));
            local[cell].add(w);
        }
        partial[i] = std::move(local);
    });

    std::vector<Welford> total(cells);
    for (const auto& local : partial) {
        for (std::size_t c = 0; c < cells; ++c) total[c].combine(local[c]);
    }

    PairwiseStats out;
    out.n_groups = g;
    out.group_kind.resize(cells);
    out.group.resize(static_cast<std::size_t>(g) * static_cast<std::size_t>(g));
    for (std::size_t c = 0; c < cells; ++c) out.group_kind[c] = total[c].cell();
    for (int gh = 0; gh < g * g; ++gh) {
        Welford merged = total[static_cast<std::size_t>(gh * 2)];
        merged.combine(total[static_cast<std::size_t>(gh * 2 + 1)]);
        out.group[static_cast<std::size_t>(gh)] = merged.cell();
    }
    return out;
}

namespace {

std::vector<MeanToward> mean_toward_filtered(const Population& population,
                                             int target_group,
                                             const ProtoKind* kind,
                                             const Grid& grid,
                                             const ModelParams& params,
                                             int threads) {
    if (target_group < 0 || target_group >= population.worldviews.size()) {
        throw std::invalid_argument("target group out of range");
    }
    const PairContext ctx(population, grid, threads);
    const int n = ctx.n;
    std::vector<int> targets;
    for (int j = 0; j < n; ++j) {
        const Agent& a = population.agents[static_cast<std::size_t>(j)];
        if (a.group == target_group && (kind == nullptr || a.kind == *kind)) targets.push_back(j);
    }
    std::vector<MeanToward> out(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        double sum = 0.0;
        long long count = 0;
        for (const int j : targets) {
            if (j == static_cast<int>(i)) continue;
            sum += ctx.attitude(static_cast<int>(i), j, params);
            ++count;
        }
        out[i] = MeanToward{count > 0 ? sum / count : 0.0, count};
    });
    return out;
}

}  // namespace

std::vector<MeanToward> per_agent_mean_toward_group(const Population& population,
                                                    int target_group,
                                                    const Grid& grid,
                                                    const ModelParams& params,
                                                    int threads) {
    return mean_toward_filtered(population, target_group, nullptr, grid, params, threads);
}

std::vector<MeanToward> per_agent_mean_toward_group_kind(const Population& population,
                                                         int target_group,
                                                         ProtoKind kind,
                                                         const Grid& grid,
                                                         const ModelParams& params,
                                                         int threads) {
    return mean_toward_filtered(population, target_group, &kind, grid, params, threads);
}

}  // namespace culsim
