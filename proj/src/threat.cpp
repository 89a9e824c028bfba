#include "culsim/threat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "culsim/attitude.hpp"
#include "culsim/parallel.hpp"

namespace culsim {

std::string_view to_string(BoundSide side) {
    return side == BoundSide::lower ? "lower" : "upper";
}

TerroristProfile make_terrorist(int n_worldviews,
                                int main_worldview,
                                const ModelParams& params,
                                double positive,
                                double negative) {
    params.require_valid();
    if (n_worldviews < 2) throw std::invalid_argument("need at least 2 worldviews");
    if (main_worldview < 0 || main_worldview >= n_worldviews) {
        throw std::invalid_argument("main worldview out of range");
    }
    if (!(positive > negative)) {
        throw std::invalid_argument("terrorist positive position must exceed the negative one");
    }
    if (positive < -1.0 || positive > 1.0 || negative < -1.0 || negative > 1.0) {
        throw std::invalid_argument("terrorist positions out of [-1, 1]");
    }
    TerroristProfile t;
    t.main_worldview = main_worldview;
    t.identity.segments.resize(static_cast<std::size_t>(n_worldviews));
    for (int k = 0; k < n_worldviews; ++k) {
        const double pos = (k == main_worldview) ? positive : negative;
        AcceptanceSegment seg;
        seg.position = pos;
        seg.lower = std::max(-1.0, pos - params.epsilon);
        seg.upper = std::min(1.0, pos + params.epsilon);
        t.identity.segments[static_cast<std::size_t>(k)] = seg;
    }
    return t;
}

double reaction_intensity(double omega_qi, const ModelParams& params) {
    if (!(omega_qi >= -1.0 && omega_qi <= 1.0)) {
        throw std::invalid_argument("omega_qi out of [-1, 1]");
    }
    if (omega_qi >= 0.0) return 0.0;
    return params.alpha * std::tanh(0.5 * omega_qi);
}

namespace {

// Moves the bound of `seg` closest to the aggressor position; ties go to
// the upper bound. The update keeps the targeted margin width >= eps.
ThreatUpdateRecord contract_margin(AcceptanceSegment& seg,
                                   double aggressor_position,
                                   double mu,
                                   double eps) {
    const double dist_lower = std::abs(seg.lower - aggressor_position);
    const double dist_upper = std::abs(seg.upper - aggressor_position);
    const BoundSide side = dist_lower < dist_upper ? BoundSide::lower : BoundSide::upper;
    double& bound = side == BoundSide::lower ? seg.lower : seg.upper;

    ThreatUpdateRecord rec;
    rec.mu = mu;
    rec.side = side;
    rec.bound_before = bound;
    const double offset = bound - seg.position;
    const double sign = offset > 0.0 ? 1.0 : (offset < 0.0 ? -1.0 : 0.0);
    bound += mu * (offset - eps * sign);
    rec.bound_after = bound;
    return rec;
}

}  // namespace

ThreatResult apply_threat(const CulturalIdentity& agent,
                          const TerroristProfile& terrorist,
                          const Grid& grid,
                          const ModelParams& params) {
    agent.require_valid();
    ThreatResult out{agent, {}};
    const double omega = attitude_to_identity(terrorist.identity, agent, grid, params);
    if (omega >= 0.0) return out;
    const double mu = reaction_intensity(omega, params);

    const auto touch = [&](int worldview) {
        auto& seg = out.identity.segments[static_cast<std::size_t>(worldview)];
        ThreatUpdateRecord rec = contract_margin(
            seg, terrorist.identity.segment(worldview).position, mu, params.epsilon);
        rec.omega_qi = omega;
        rec.worldview = worldview;
        out.records.push_back(rec);
    };
    if (params.threat_all_worldviews) {
        for (int k = 0; k < agent.size(); ++k) touch(k);
    } else {
        touch(terrorist.main_worldview);
    }
    return out;
}

std::pair<Population, std::vector<ThreatUpdateRecord>> scenario_step(const Population& population,
                                                                     const ScenarioSpec& spec,
                                                                     const Grid& grid,
                                                                     const ModelParams& params,
                                                                     int threads,
                                                                     int message_index) {
    Population next = population;
    std::vector<std::vector<ThreatUpdateRecord>> per_agent(population.agents.size());
    parallel_for(population.agents.size(), threads, [&](std::size_t i) {
        ThreatResult res = apply_threat(population.agents[i].identity, spec.terrorist, grid, params);
        next.agents[i].identity = std::move(res.identity);
        for (auto& rec : res.records) {
            rec.agent_id = population.agents[i].id;
            rec.message_index = message_index;
        }
        per_agent[i] = std::move(res.records);
    });
    std::vector<ThreatUpdateRecord> trace;
    for (auto& recs : per_agent) {
        trace.insert(trace.end(), recs.begin(), recs.end());
    }
    return {std::move(next), std::move(trace)};
}

ScenarioResult run_scenario(const Population& population,
                            const ScenarioSpec& spec,
                            const Grid& grid,
                            const ModelParams& params,
                            int threads) {
    if (spec.n_messages < 0) throw std::invalid_argument("n_messages must be >= 0");
    ScenarioResult result;
    result.spec = spec;

    Population current = population;
    current.params = params;
    result.snapshots.push_back(current);
    result.summaries.push_back(pairwise_attitude_stats(current, grid, params, threads));

    for (int t = 1; t <= spec.n_messages; ++t) {
        auto [next, records] = scenario_step(current, spec, grid, params, threads, t);
        if (spec.record_trace) {
            result.trace.insert(result.trace.end(), records.begin(), records.end());
        }
        current = std::move(next);
        result.snapshots.push_back(current);
        result.summaries.push_back(pairwise_attitude_stats(current, grid, params, threads));
    }
    return result;
}

}  // namespace culsim
