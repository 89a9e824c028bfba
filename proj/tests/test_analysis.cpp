#include <doctest.h>

#include <cmath>

#include "culsim/analysis.hpp"
#include "culsim/attitude.hpp"
#include "oracle.hpp"

using namespace culsim;

namespace {

AcceptanceSegment seg(double a, double b, double B) { return AcceptanceSegment{a, b, B}; }

CulturalIdentity identity3(AcceptanceSegment m, AcceptanceSegment c, AcceptanceSegment a) {
    CulturalIdentity id;
    id.segments = {m, c, a};
    return id;
}

Population shared_identity_population() {
    Population pop;
    const CulturalIdentity id =
        identity3(seg(0.5, 0.2, 0.8), seg(0.1, -0.2, 0.4), seg(-0.2, -0.5, 0.2));
    for (int i = 0; i < 6; ++i) {
        pop.agents.push_back(Agent{i, i / 2, i % 2 ? ProtoKind::exclusive : ProtoKind::inclusive, id});
    }
    return pop;
}

// Observers with a small high margin and a large low margin on the first
// worldview, targets with large margins that contract under threat; the
// favorable setting where attitudes toward the threatened group rise.
Population favorable_population() {
    Population pop;
    const CulturalIdentity obs_c =
        identity3(seg(0.3, -0.2, 0.35), seg(0.7, 0.2, 0.9), seg(0.1, -0.1, 0.5));
    const CulturalIdentity obs_a =
        identity3(seg(0.3, -0.2, 0.35), seg(0.1, -0.1, 0.5), seg(0.7, 0.2, 0.9));
    const CulturalIdentity tgt =
        identity3(seg(0.4, -0.2, 0.95), seg(0.1, -0.1, 0.5), seg(0.1, -0.1, 0.5));
    pop.agents = {Agent{0, 1, ProtoKind::inclusive, obs_c}, Agent{1, 2, ProtoKind::inclusive, obs_a},
                  Agent{2, 0, ProtoKind::inclusive, tgt}, Agent{3, 0, ProtoKind::exclusive, tgt}};
    return pop;
}

ScenarioResult favorable_run(int n_messages) {
    const Population pop = favorable_population();
    ScenarioSpec spec;
    spec.n_messages = n_messages;
    spec.terrorist = make_terrorist(3, 0, pop.params);
    const Grid grid(pop.params.d);
    return run_scenario(pop, spec, grid, pop.params);
}

}  // namespace

TEST_CASE("attitude matrix: identical population and degenerate cells") {
    const Population pop = shared_identity_population();
    const Grid grid(pop.params.d);
    const AttitudeMatrix m = attitude_matrix(pop, grid, pop.params);
    REQUIRE(m.n_groups == 3);
    for (int obs = 0; obs < 3; ++obs) {
        for (int tgt = 0; tgt < 3; ++tgt) {
            REQUIRE(m.at(obs, tgt).present());
            CHECK(std::abs(m.at(obs, tgt).mean - 1.0) <= 1e-12);
        }
    }

    // A single-agent population has no (i, j) pair at all.
    Population lone;
    lone.agents.push_back(pop.agents.front());
    const AttitudeMatrix empty = attitude_matrix(lone, grid, lone.params);
    for (int obs = 0; obs < 3; ++obs) {
        for (int tgt = 0; tgt < 3; ++tgt) {
            CHECK(!empty.at(obs, tgt).present());
        }
    }
}

TEST_CASE("attitude matrix means agree with the survey indicators") {
    const Population pop = favorable_population();
    const Grid grid(pop.params.d);
    const AttitudeMatrix m = attitude_matrix(pop, grid, pop.params);
    // compute_indicators requires two agents per group; compare the cells
    // that exist in both on a population that satisfies it.
    Population doubled = pop;
    int id = pop.size();
    for (const Agent& a : pop.agents) {
        Agent copy = a;
        copy.id = id++;
        doubled.agents.push_back(copy);
    }
    const AttitudeMatrix m2 = attitude_matrix(doubled, grid, doubled.params);
    const IndicatorMatrix ind = compute_indicators(doubled, grid, doubled.params);
    for (int obs = 0; obs < 3; ++obs) {
        for (int tgt = 0; tgt < 3; ++tgt) {
            CHECK(std::abs(m2.at(obs, tgt).mean - ind.mean_at(obs, tgt)) <= 1e-12);
        }
    }
    CHECK(m.n_groups == m2.n_groups);
}

TEST_CASE("mean attitude toward a group over a scenario") {
    // Zero messages: a single-entry series.
    const ScenarioResult none = favorable_run(0);
    CHECK(mean_attitude_toward_group(none, 0).size() == 1);

    // Unthreatened population: constant series.
    {
        Population calm;
        const ModelParams params;
        const TerroristProfile t = make_terrorist(3, 0, params);
        for (int i = 0; i < 4; ++i) {
            calm.agents.push_back(Agent{i, i % 3, ProtoKind::exclusive, t.identity});
        }
        ScenarioSpec spec;
        spec.n_messages = 3;
        spec.terrorist = t;
        const Grid grid(params.d);
        const ScenarioResult run = run_scenario(calm, spec, grid, params);
        const auto series = mean_attitude_toward_group(run, 0);
        REQUIRE(series.size() == 4);
        for (const double v : series) CHECK(v == series.front());
    }

    // Two-agent pair across one threat step matches the hand-computed chain.
    {
        Population pair;
        const CulturalIdentity obs =
            identity3(seg(0.2, -0.1, 0.8), seg(0.1, -0.2, 0.6), seg(0.7, 0.2, 0.9));
        const CulturalIdentity tgt =
            identity3(seg(0.5, 0.0, 0.9), seg(0.1, -0.2, 0.5), seg(0.1, -0.2, 0.5));
        pair.agents = {Agent{0, 2, ProtoKind::inclusive, obs}, Agent{1, 0, ProtoKind::inclusive, tgt}};
        const ModelParams params = pair.params;
        ScenarioSpec spec;
        spec.n_messages = 1;
        spec.terrorist = make_terrorist(3, 0, params);
        const Grid grid(params.d);
        const ScenarioResult run = run_scenario(pair, spec, grid, params);
        const auto series = mean_attitude_toward_group(run, 0);
        REQUIRE(series.size() == 2);

        // Independent chain: attitudes, reaction, contraction.
        const auto to_oracle = [](const CulturalIdentity& id) {
            std::vector<oracle::Seg> out;
            for (const auto& s : id.segments) out.push_back({s.position, s.lower, s.upper});
            return out;
        };
        const auto q = to_oracle(spec.terrorist.identity);
        auto obs_o = to_oracle(obs);
        auto tgt_o = to_oracle(tgt);
        const double before = oracle::identity_attitude(obs_o, tgt_o, params.d, 1.0);
        CHECK(std::abs(series[0] - before) <= 1e-12);
        for (auto* agent : {&obs_o, &tgt_o}) {
            const double omega = oracle::identity_attitude(q, *agent, params.d, 1.0);
            if (omega >= 0.0) continue;
            const double mu = oracle::reaction(omega, params.alpha);
            (*agent)[0] = oracle::contract((*agent)[0], q[0].a, mu, params.epsilon);
        }
        const double after = oracle::identity_attitude(obs_o, tgt_o, params.d, 1.0);
        CHECK(std::abs(series[1] - after) <= 1e-12);
    }
}

TEST_CASE("classify_changes: no threat means everything is no_change") {
    Population calm;
    const ModelParams params;
    const TerroristProfile t = make_terrorist(3, 0, params);
    for (int i = 0; i < 6; ++i) {
        calm.agents.push_back(Agent{i, i % 3, i % 2 ? ProtoKind::exclusive : ProtoKind::inclusive,
                                    t.identity});
    }
    ScenarioSpec spec;
    spec.n_messages = 7;
    spec.terrorist = t;
    const Grid grid(params.d);
    const ScenarioResult run = run_scenario(calm, spec, grid, params);
    const ChangeAnalysis analysis = classify_changes(run, 1e-9);
    for (const ChangeClass c : analysis.per_agent) CHECK(c == ChangeClass::no_change);
    CHECK(std::abs(analysis.per_agent_dist.percent[static_cast<std::size_t>(ChangeClass::no_change)]
                   - 100.0) <= 1e-9);
    CHECK(analysis.per_agent_dist.total == 6);
    CHECK(analysis.per_agent_time_dist.total == 42);
}

TEST_CASE("classify_changes: percentages sum to 100 and labels refine monotonically") {
    const ScenarioResult run = favorable_run(7);

    double previous_tau = 1e9;
    std::vector<ChangeClass> previous;
    for (const double tau : {1e9, 1e-1, 1e-3, 1e-9}) {
        const ChangeAnalysis analysis = classify_changes(run, tau);
        double sum = 0.0;
        for (const double p : analysis.per_agent_dist.percent) sum += p;
        CHECK(std::abs(sum - 100.0) <= 0.01);
        for (const auto& row : analysis.per_agent_dist.rows) {
            double row_sum = 0.0;
            for (const double p : row.percent) row_sum += p;
            CHECK(std::abs(row_sum - 100.0) <= 0.01);
        }
        double tsum = 0.0;
        for (const double p : analysis.per_agent_time_dist.percent) tsum += p;
        CHECK(std::abs(tsum - 100.0) <= 0.01);

        if (tau >= 1e9) {
            for (const ChangeClass c : analysis.per_agent) CHECK(c == ChangeClass::no_change);
        }
        if (!previous.empty()) {
            // Shrinking tau never turns an increase label into decrease_both.
            for (std::size_t i = 0; i < analysis.per_agent.size(); ++i) {
                const bool was_increase = previous[i] == ChangeClass::increase_both
                                          || previous[i] == ChangeClass::increase_inclusive_only
                                          || previous[i] == ChangeClass::increase_exclusive_only;
                if (was_increase) CHECK(analysis.per_agent[i] != ChangeClass::decrease_both);
            }
        }
        previous = analysis.per_agent;
        REQUIRE(tau < previous_tau);
        previous_tau = tau;
    }
}

TEST_CASE("classify_changes: sign patterns map to the right classes") {
    // Hand-built snapshots: agent 0's attitude toward inclusive M rises
    // while its attitude toward exclusive M falls.
    Population before;
    const CulturalIdentity wide =
        identity3(seg(0.2, -0.6, 0.8), seg(0.5, 0.1, 0.9), seg(0.1, -0.3, 0.5));
    const CulturalIdentity inc_m =
        identity3(seg(0.5, 0.0, 0.9), seg(0.1, -0.2, 0.5), seg(0.1, -0.2, 0.5));
    const CulturalIdentity exc_m =
        identity3(seg(0.6, 0.3, 0.7), seg(-0.4, -0.7, -0.1), seg(-0.4, -0.7, -0.1));
    before.agents = {Agent{0, 1, ProtoKind::inclusive, wide}, Agent{1, 0, ProtoKind::inclusive, inc_m},
                     Agent{2, 0, ProtoKind::exclusive, exc_m}};

    Population after = before;
    // The inclusive-M target moves deeper into the observer's segment
    // (higher attitude); the exclusive-M target narrows far away from it
    // while the observer is untouched.
    after.agents[1].identity =
        identity3(seg(0.4, -0.1, 0.7), seg(0.1, -0.2, 0.5), seg(0.1, -0.2, 0.5));
    after.agents[2].identity =
        identity3(seg(0.9, 0.85, 0.95), seg(-0.4, -0.7, -0.1), seg(-0.4, -0.7, -0.1));

    ScenarioResult run;
    run.spec.terrorist = make_terrorist(3, 0, before.params);
    run.spec.n_messages = 1;
    run.snapshots = {before, after};

    const ChangeAnalysis analysis = classify_changes(run, 1e-9);
    CHECK(analysis.inclusive_axis_present);
    CHECK(analysis.exclusive_axis_present);
    CHECK(analysis.per_agent[0] == ChangeClass::increase_inclusive_only);

    CHECK_THROWS_AS(classify_changes(ScenarioResult{}, 1e-9), std::invalid_argument);
}

TEST_CASE("classify_changes degrades to one axis when a kind is missing") {
    Population before;
    const CulturalIdentity obs =
        identity3(seg(0.2, -0.6, 0.8), seg(0.5, 0.1, 0.9), seg(0.1, -0.3, 0.5));
    const CulturalIdentity inc_m =
        identity3(seg(0.5, 0.0, 0.9), seg(0.1, -0.2, 0.5), seg(0.1, -0.2, 0.5));
    before.agents = {Agent{0, 1, ProtoKind::inclusive, obs}, Agent{1, 0, ProtoKind::inclusive, inc_m}};
    Population after = before;
    after.agents[1].identity =
        identity3(seg(0.4, -0.1, 0.7), seg(0.1, -0.2, 0.5), seg(0.1, -0.2, 0.5));

    ScenarioResult run;
    run.spec.terrorist = make_terrorist(3, 0, before.params);
    run.spec.n_messages = 1;
    run.snapshots = {before, after};

    const ChangeAnalysis analysis = classify_changes(run, 1e-9);
    CHECK(analysis.inclusive_axis_present);
    CHECK(!analysis.exclusive_axis_present);
    CHECK(analysis.per_agent[0] == ChangeClass::increase_inclusive_only);
}

TEST_CASE("condition profile: homogeneous population raises no flags") {
    const Population pop = shared_identity_population();
    const Grid grid(pop.params.d);
    const ConditionProfile profile = condition_profile(pop, grid, pop.params, 0);
    for (const auto& f : profile.flags) {
        CHECK(!f.margin_high_larger);
        CHECK(!f.margin_high_smaller);
        CHECK(!f.margin_low_larger);
        CHECK(!f.position_lower);
        CHECK(!f.attitude_higher);
    }
    CHECK(!profile.favorable);
}

TEST_CASE("condition profile: group statistics and flags") {
    Population pop;
    // Group M with a wide high margin, C and A with narrow ones.
    pop.agents = {
        Agent{0, 0, ProtoKind::inclusive, identity3(seg(0.3, -0.3, 0.9), seg(0.1, -0.2, 0.4), seg(0.1, -0.2, 0.4))},
        Agent{1, 0, ProtoKind::inclusive, identity3(seg(0.3, -0.3, 0.9), seg(0.1, -0.2, 0.4), seg(0.1, -0.2, 0.4))},
        Agent{2, 1, ProtoKind::inclusive, identity3(seg(0.5, -0.1, 0.6), seg(0.6, 0.2, 0.9), seg(0.1, -0.2, 0.4))},
        Agent{3, 2, ProtoKind::inclusive, identity3(seg(0.5, -0.1, 0.6), seg(0.1, -0.2, 0.4), seg(0.6, 0.2, 0.9))},
    };
    const Grid grid(pop.params.d);
    const ConditionProfile profile = condition_profile(pop, grid, pop.params, 0);

    CHECK(profile.groups[0].count == 2);
    CHECK(std::abs(profile.groups[0].mean_margin_high - 0.6) <= 1e-12);
    CHECK(std::abs(profile.groups[1].mean_margin_high - 0.1) <= 1e-12);
    CHECK(std::abs(profile.population.mean_margin_high - (0.6 + 0.6 + 0.1 + 0.1) / 4.0) <= 1e-12);

    CHECK(profile.flags[0].margin_high_larger);
    CHECK(!profile.flags[0].margin_high_smaller);
    CHECK(profile.flags[1].margin_high_smaller);
    CHECK(profile.flags[0].position_lower);

    // Permutation invariance.
    Population reversed = pop;
    std::reverse(reversed.agents.begin(), reversed.agents.end());
    const ConditionProfile again = condition_profile(reversed, grid, reversed.params, 0);
    CHECK(std::abs(again.population.mean_margin_high - profile.population.mean_margin_high) <= 1e-12);
    CHECK(again.flags[0].margin_high_larger == profile.flags[0].margin_high_larger);
}

TEST_CASE("mechanism: large high margin observers grow colder toward inclusive targets") {
    // An inclusive non-M observer with a wide high margin on the first
    // worldview sees an inclusive M target as further away once both have
    // contracted: the attitude strictly decreases.
    Population pop;
    const CulturalIdentity obs =
        identity3(seg(0.2, -0.1, 0.8), seg(0.1, -0.2, 0.6), seg(0.7, 0.2, 0.9));
    const CulturalIdentity tgt =
        identity3(seg(0.5, 0.0, 0.9), seg(0.1, -0.2, 0.5), seg(0.1, -0.2, 0.5));
    pop.agents = {Agent{0, 2, ProtoKind::inclusive, obs}, Agent{1, 0, ProtoKind::inclusive, tgt}};
    ScenarioSpec spec;
    spec.n_messages = 1;
    spec.terrorist = make_terrorist(3, 0, pop.params);
    const Grid grid(pop.params.d);
    const ScenarioResult run = run_scenario(pop, spec, grid, pop.params);
    const auto series = mean_attitude_toward_group(run, 0);
    CHECK(series[1] < series[0]);
}

TEST_CASE("mechanism: saturated observers do not react to the target's contraction") {
    Population pop;
    const CulturalIdentity obs =
        identity3(seg(-0.7, -0.75, -0.65), seg(0.6, 0.1, 0.9), seg(-0.5, -0.8, -0.2));
    const CulturalIdentity tgt =
        identity3(seg(0.55, 0.05, 0.75), seg(-0.5, -0.9, -0.1), seg(-0.5, -0.9, -0.1));
    pop.agents = {Agent{0, 1, ProtoKind::exclusive, obs}, Agent{1, 0, ProtoKind::exclusive, tgt}};
    ScenarioSpec spec;
    spec.n_messages = 1;
    spec.terrorist = make_terrorist(3, 0, pop.params);
    const Grid grid(pop.params.d);
    const ScenarioResult run = run_scenario(pop, spec, grid, pop.params);

    // The target's high margin does contract...
    CHECK(run.snapshots[1].agents[1].identity.segments[0].margin_high()
          < run.snapshots[0].agents[1].identity.segments[0].margin_high());
    // ... but the observer's view barely moves.
    const auto series = mean_attitude_toward_group(run, 0);
    CHECK(std::abs(series[1] - series[0]) <= 1e-6);
}

TEST_CASE("mechanism: mutually wide margins end in a colder view") {
    Population pop;
    const CulturalIdentity obs =
        identity3(seg(-0.2, -0.6, 0.0), seg(0.6, 0.1, 0.9), seg(-0.5, -0.8, -0.2));
    const CulturalIdentity tgt =
        identity3(seg(0.4, 0.05, 0.95), seg(-0.5, -0.9, -0.1), seg(-0.5, -0.9, -0.1));
    pop.agents = {Agent{0, 1, ProtoKind::exclusive, obs}, Agent{1, 0, ProtoKind::exclusive, tgt}};
    ScenarioSpec spec;
    spec.n_messages = 1;
    spec.terrorist = make_terrorist(3, 0, pop.params);
    const Grid grid(pop.params.d);
    const ScenarioResult run = run_scenario(pop, spec, grid, pop.params);
    const auto series = mean_attitude_toward_group(run, 0);
    CHECK(series[1] < series[0]);
}

TEST_CASE("mechanism: favorable conditions raise the mean attitude toward the threatened group") {
    const ScenarioResult run = favorable_run(7);
    const auto series = mean_attitude_toward_group(run, 0);
    REQUIRE(series.size() == 8);
    CHECK(series.back() > series.front());
}
