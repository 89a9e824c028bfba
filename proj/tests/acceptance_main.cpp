// Acceptance suite: one pass/fail line per criterion. Exercises the closed
// forms, the oracle equivalences, the threat dynamics guarantees, the
// mechanism fixtures, the calibration self-consistency band and the
// end-to-end CLI determinism.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "culsim/analysis.hpp"
#include "culsim/attitude.hpp"
#include "culsim/config.hpp"
#include "culsim/rng.hpp"
#include "culsim/runner.hpp"
#include "culsim/serialization.hpp"
#include "culsim/synthesis.hpp"
#include "culsim/text_io.hpp"
#include "culsim/threat.hpp"
#include "oracle.hpp"

namespace {

namespace fs = std::filesystem;
using namespace culsim;

struct Failure {
    std::string detail;
};

#define ACCEPT_REQUIRE(cond, message)                                   \
    do {                                                                \
        if (!(cond)) throw Failure{std::string(message)};               \
    } while (0)

AcceptanceSegment seg(double a, double b, double B) { return AcceptanceSegment{a, b, B}; }

CulturalIdentity identity3(AcceptanceSegment m, AcceptanceSegment c, AcceptanceSegment a) {
    CulturalIdentity id;
    id.segments = {m, c, a};
    return id;
}

AcceptanceSegment random_segment(RngStream& rng, double min_width) {
    const double a = rng.uniform(-1.0 + 2.0 * min_width, 1.0 - 2.0 * min_width);
    const double wl = rng.uniform(min_width, a + 1.0);
    const double wh = rng.uniform(min_width, 1.0 - a);
    return AcceptanceSegment{a, a - wl, a + wh};
}

// Point-segment aggressor whose attitude about anything is exactly -1.
TerroristProfile saturating_terrorist() {
    TerroristProfile t;
    t.main_worldview = 0;
    t.identity.segments = {seg(1.0, 1.0, 1.0), seg(-1.0, -1.0, -1.0), seg(-1.0, -1.0, -1.0)};
    return t;
}

// --- criterion 1: closed forms of the position attitude ---------------------

void criterion_1() {
    const AcceptanceSegment s = seg(0.5, 0.3, 0.7);
    ACCEPT_REQUIRE(attitude_to_position(s, 0.5) == 1.0, "interior must score exactly 1");
    ACCEPT_REQUIRE(attitude_to_position(s, 0.69) == 1.0, "interior must score exactly 1");
    ACCEPT_REQUIRE(std::abs(attitude_to_position(s, 0.3)) <= 1e-12, "lower bound must score 0");
    ACCEPT_REQUIRE(std::abs(attitude_to_position(s, 0.7)) <= 1e-12, "upper bound must score 0");
    ACCEPT_REQUIRE(std::abs(attitude_to_position(s, 0.1) + 0.46212) <= 1e-5, "y = -1 value below");
    ACCEPT_REQUIRE(std::abs(attitude_to_position(s, 0.9) + 0.46212) <= 1e-5, "y = -1 value above");

    RngStream rng(901, "accept.eq1", 0);
    int monotone_checks = 0;
    int saturation_checks = 0;
    for (int i = 0; i < 10000; ++i) {
        const AcceptanceSegment r = random_segment(rng, 0.02);
        const bool above = rng.uniform01() < 0.5;
        const double width = above ? r.margin_high() : r.margin_low();
        double prev = 0.0;
        bool first = true;
        double dist = rng.uniform(0.0, 0.05);
        for (int step = 0; step < 6; ++step) {
            const double x = above ? r.upper + dist : r.lower - dist;
            if (x > 1.0 || x < -1.0) break;
            const double y = 1.0 - dist / width;
            if (y < -30.0) break;
            const double v = attitude_to_position(r, x);
            if (y < -7.3) {
                ACCEPT_REQUIRE(v < -0.95, "attitude must drop below -0.95 once y < -7.3");
                ++saturation_checks;
            }
            if (!first && dist > 0.0) {
                ACCEPT_REQUIRE(v < prev, "attitude must decrease strictly outside the segment");
                ++monotone_checks;
            }
            prev = v;
            first = false;
            dist = dist * 1.7 + 0.02;
        }
    }
    ACCEPT_REQUIRE(monotone_checks >= 10000, "not enough monotonicity samples");
    ACCEPT_REQUIRE(saturation_checks >= 100, "not enough saturation samples");
}

// --- criterion 2: segment-attitude oracle equivalence -----------------------

void criterion_2() {
    ModelParams params;
    {
        const Grid grid(5);
        const double worked = attitude_to_segment(seg(0.5, 0.3, 0.7), seg(0.25, -0.1, 0.6), grid, params);
        ACCEPT_REQUIRE(std::abs(worked - 0.18242) <= 1e-5, "worked five-point example");
    }
    RngStream rng(902, "accept.eq2", 0);
    for (const int d : {3, 5, 11, 400}) {
        const Grid grid(d);
        int done = 0;
        while (done < 1000) {
            const AcceptanceSegment obs = random_segment(rng, 0.05);
            const AcceptanceSegment tgt = random_segment(rng, 0.05);
            const auto [lo, hi] = grid.interior_range(tgt);
            if (lo >= hi) continue;
            const double got = attitude_to_segment(obs, tgt, grid, params);
            const double expected = oracle::segment_attitude(
                {obs.position, obs.lower, obs.upper}, {tgt.position, tgt.lower, tgt.upper}, d,
                params.eq2_normalizer);
            ACCEPT_REQUIRE(std::abs(got - expected) <= 1e-12, "brute-force mismatch at d = " + std::to_string(d));
            ++done;
        }
    }
}

// --- criterion 3: self-attitude ----------------------------------------------

void criterion_3() {
    const ModelParams params;
    const Grid grid(params.d);
    RngStream rng(903, "accept.self", 0);
    for (int i = 0; i < 1000; ++i) {
        CulturalIdentity id;
        for (int k = 0; k < 3; ++k) id.segments.push_back(random_segment(rng, params.epsilon));
        const double self = attitude_to_identity(id, id, grid, params);
        ACCEPT_REQUIRE(std::abs(self - 1.0) <= 1e-12, "self-attitude must be 1");
    }
}

// --- criterion 4: threat dynamics --------------------------------------------

void criterion_4() {
    ModelParams params;  // alpha = 0.5, epsilon = 0.05
    const Grid grid(params.d);

    {
        const TerroristProfile t = saturating_terrorist();
        CulturalIdentity agent =
            identity3(seg(0.5, 0.3, 0.7), seg(-0.5, -0.8, -0.2), seg(0.1, -0.2, 0.4));
        const ThreatResult res = apply_threat(agent, t, grid, params);
        ACCEPT_REQUIRE(res.records.size() == 1, "exactly one bound update expected");
        ACCEPT_REQUIRE(std::abs(res.identity.segments[0].upper - 0.66534) <= 1e-5,
                       "worked bound update 0.7 -> 0.66534");
    }
    {
        // Exact fixed point with a binary-exact epsilon width.
        ModelParams exact = params;
        exact.epsilon = 0.0625;
        CulturalIdentity agent =
            identity3(seg(0.25, 0.1875, 0.3125), seg(-0.5, -0.8, -0.2), seg(0.1, -0.2, 0.4));
        const ThreatResult res = apply_threat(agent, saturating_terrorist(), grid, exact);
        ACCEPT_REQUIRE(res.identity == agent, "width == epsilon must be an exact fixed point");
    }

    RngStream rng(904, "accept.threat", 0);
    ScenarioSpec spec;
    spec.terrorist = make_terrorist(3, 0, params);
    spec.n_messages = 7;
    for (int p = 0; p < 1000; ++p) {
        Population pop;
        pop.params = params;
        const int n = 1 + static_cast<int>(rng.next_u64() % 5);
        for (int i = 0; i < n; ++i) {
            CulturalIdentity id;
            for (int k = 0; k < 3; ++k) id.segments.push_back(random_segment(rng, params.epsilon));
            if (id.segments[static_cast<std::size_t>(group_of(id))].position <= 0.0) {
                id.segments[0] = seg(0.5, 0.4, 0.6);
            }
            pop.agents.push_back(Agent{i, group_of(id),
                                       i % 2 ? ProtoKind::exclusive : ProtoKind::inclusive, id});
        }
        std::vector<double> widths(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            widths[static_cast<std::size_t>(i)] =
                pop.agents[static_cast<std::size_t>(i)].identity.segments[0].margin_high();
        }
        Population current = pop;
        for (int t = 1; t <= spec.n_messages; ++t) {
            auto [next, records] = scenario_step(current, spec, grid, params, 0, t);
            current = std::move(next);
            for (int i = 0; i < n; ++i) {
                const CulturalIdentity& id = current.agents[static_cast<std::size_t>(i)].identity;
                for (const AcceptanceSegment& s : id.segments) {
                    ACCEPT_REQUIRE(s.margin_low() >= params.epsilon - 1e-12, "margin fell below epsilon");
                    ACCEPT_REQUIRE(s.margin_high() >= params.epsilon - 1e-12, "margin fell below epsilon");
                }
                const double width = id.segments[0].margin_high();
                ACCEPT_REQUIRE(width <= widths[static_cast<std::size_t>(i)] + 1e-15,
                               "targeted width must not increase");
                widths[static_cast<std::size_t>(i)] = width;
            }
        }
    }
}

// --- criterion 5: mechanism directionality ------------------------------------

void criterion_5() {
    const ModelParams params;
    const Grid grid(params.d);
    const TerroristProfile t = make_terrorist(3, 0, params);

    const auto one_step_delta = [&](const CulturalIdentity& obs, const CulturalIdentity& tgt) {
        const double before = attitude_to_identity(obs, tgt, grid, params);
        const CulturalIdentity obs2 = apply_threat(obs, t, grid, params).identity;
        const CulturalIdentity tgt2 = apply_threat(tgt, t, grid, params).identity;
        const double after = attitude_to_identity(obs2, tgt2, grid, params);
        return std::pair<double, double>(before, after);
    };

    // (a) inclusive non-M observer with a large high margin vs inclusive M.
    {
        const auto [before, after] = one_step_delta(
            identity3(seg(0.2, -0.1, 0.8), seg(0.1, -0.2, 0.6), seg(0.7, 0.2, 0.9)),
            identity3(seg(0.5, 0.0, 0.9), seg(0.1, -0.2, 0.5), seg(0.1, -0.2, 0.5)));
        ACCEPT_REQUIRE(after < before, "(a) attitude toward inclusive M must strictly decrease");
    }
    // (b) saturated exclusive observer vs small-high-margin exclusive M.
    {
        const auto [before, after] = one_step_delta(
            identity3(seg(-0.7, -0.75, -0.65), seg(0.6, 0.1, 0.9), seg(-0.5, -0.8, -0.2)),
            identity3(seg(0.55, 0.05, 0.75), seg(-0.5, -0.9, -0.1), seg(-0.5, -0.9, -0.1)));
        ACCEPT_REQUIRE(std::abs(after - before) <= 1e-6, "(b) attitude must not change");
    }
    // (c) both margins large: the observer grows strictly colder.
    {
        const auto [before, after] = one_step_delta(
            identity3(seg(-0.2, -0.6, 0.0), seg(0.6, 0.1, 0.9), seg(-0.5, -0.8, -0.2)),
            identity3(seg(0.4, 0.05, 0.95), seg(-0.5, -0.9, -0.1), seg(-0.5, -0.9, -0.1)));
        ACCEPT_REQUIRE(after < before, "(c) attitude must strictly decrease");
    }
    // (d) favorable conditions: mean attitude toward group M rises over 7 messages.
    {
        Population pop;
        pop.agents = {
            Agent{0, 1, ProtoKind::inclusive,
                  identity3(seg(0.3, -0.2, 0.35), seg(0.7, 0.2, 0.9), seg(0.1, -0.1, 0.5))},
            Agent{1, 2, ProtoKind::inclusive,
                  identity3(seg(0.3, -0.2, 0.35), seg(0.1, -0.1, 0.5), seg(0.7, 0.2, 0.9))},
            Agent{2, 0, ProtoKind::inclusive,
                  identity3(seg(0.4, -0.2, 0.95), seg(0.1, -0.1, 0.5), seg(0.1, -0.1, 0.5))},
            Agent{3, 0, ProtoKind::exclusive,
                  identity3(seg(0.4, -0.2, 0.95), seg(0.1, -0.1, 0.5), seg(0.1, -0.1, 0.5))},
        };
        ScenarioSpec spec;
        spec.n_messages = 7;
        spec.terrorist = t;
        const ScenarioResult run = run_scenario(pop, spec, grid, params);
        const auto series = mean_attitude_toward_group(run, 0);
        ACCEPT_REQUIRE(series.back() > series.front(),
                       "(d) mean attitude toward group M must strictly increase");
    }
}

// --- criterion 6: calibration self-consistency --------------------------------

void criterion_6() {
    PopulationSpec base;
    base.n = 1000;
    base.worldviews = Worldviews{};
    base.shares = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    base.x_inclusive = {0.4, 0.6, 0.5};
    base.prototypes = example_prototypes(base.worldviews);

    const Grid grid(base.params.d);
    PopulationSpec ref_spec = base;
    ref_spec.n = 60;
    const IndicatorMatrix reference =
        compute_indicators(build_population(ref_spec), grid, base.params);

    SearchConfig cfg;
    cfg.n_starts = 6000;
    cfg.refine_evals = 14000;
    cfg.n_climb = 24;
    cfg.top_p = 120;
    cfg.fit_n = 60;
    const long long budget = cfg.n_starts + cfg.refine_evals;
    ACCEPT_REQUIRE(budget <= 100000, "budget must stay within 1e5 evaluations");

    const FitResult result = fit(reference, base, cfg, 20260810);
    ACCEPT_REQUIRE(result.evaluations <= 100000, "evaluation count must stay within 1e5");
    ACCEPT_REQUIRE(!result.candidates.empty(), "fit returned no candidates");
    const FitCandidate& best = result.candidates.front();
    ACCEPT_REQUIRE(best.avg_rel <= 0.07,
                   "best average relative error " + fmt_g17(best.avg_rel) + " exceeds 0.07");

    // Expansion to the full population size keeps every invariant.
    const Population expanded = build_population(best.spec);
    ACCEPT_REQUIRE(expanded.size() == 1000, "expansion must produce 1000 agents");
    expanded.require_valid();
}

// --- criterion 7: end-to-end determinism and scale -----------------------------

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        files[fs::relative(entry.path(), root).generic_string()] = read_file(entry.path());
    }
    return files;
}

void criterion_7(double* simulate_seconds) {
    const char* bin = std::getenv("CULSIM_BIN");
    ACCEPT_REQUIRE(bin != nullptr && *bin != '\0', "CULSIM_BIN must point at the CLI binary");

    const fs::path root = fs::temp_directory_path() / "culsim_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    const auto run = [&](const std::string& name, int threads) {
        const fs::path out = root / name;
        std::ostringstream cmd;
        cmd << "\"" << bin << "\" simulate --seed 7 --threads " << threads << " --out \""
            << out.string() << "\" > \"" << (root / (name + ".log")).string() << "\" 2>&1";
        const auto start = std::chrono::steady_clock::now();
        const int rc = std::system(cmd.str().c_str());
        const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
        ACCEPT_REQUIRE(rc == 0, "simulate exited with a nonzero status");
        return elapsed.count();
    };

    const double t1 = run("threads1", 1);
    *simulate_seconds = t1;
    run("threads4", 4);
    run("repeat", 1);

    ACCEPT_REQUIRE(t1 < 60.0, "single-threaded simulate took " + fmt_g17(t1) + " s (limit 60)");

    const auto a = read_tree(root / "threads1");
    const auto b = read_tree(root / "threads4");
    const auto c = read_tree(root / "repeat");
    ACCEPT_REQUIRE(!a.empty(), "simulate produced no artifacts");
    ACCEPT_REQUIRE(a == b, "outputs differ across thread counts");
    ACCEPT_REQUIRE(a == c, "outputs differ across repeated runs");
    ACCEPT_REQUIRE(a.count("snapshots/snapshot_007.csv") == 1, "expected 8 snapshots");
    fs::remove_all(root);
}

// --- criterion 8: change-classification plumbing -------------------------------

void criterion_8() {
    const ModelParams params;
    const Grid grid(params.d);
    const TerroristProfile t = make_terrorist(3, 0, params);

    // Threatened mixed population: percentages per aggregation sum to 100.
    {
        PopulationSpec spec = default_config().popspec;
        spec.n = 60;
        const Population pop = build_population(spec);
        ScenarioSpec scenario;
        scenario.n_messages = 7;
        scenario.terrorist = t;
        const ScenarioResult run = run_scenario(pop, scenario, grid, params);
        const ChangeAnalysis analysis = classify_changes(run, 1e-9);
        double sum = 0.0;
        for (const double p : analysis.per_agent_dist.percent) sum += p;
        ACCEPT_REQUIRE(std::abs(sum - 100.0) <= 0.01, "per-agent percentages must sum to 100");
        double tsum = 0.0;
        for (const double p : analysis.per_agent_time_dist.percent) tsum += p;
        ACCEPT_REQUIRE(std::abs(tsum - 100.0) <= 0.01, "per-(agent,t) percentages must sum to 100");
        for (const auto& row : analysis.per_agent_dist.rows) {
            double row_sum = 0.0;
            for (const double p : row.percent) row_sum += p;
            ACCEPT_REQUIRE(std::abs(row_sum - 100.0) <= 0.01, "row percentages must sum to 100");
        }
    }
    // No-threat run: everything is no_change.
    {
        Population calm;
        for (int i = 0; i < 12; ++i) {
            calm.agents.push_back(Agent{i, i % 3, i % 2 ? ProtoKind::exclusive : ProtoKind::inclusive,
                                        t.identity});
        }
        ScenarioSpec scenario;
        scenario.n_messages = 7;
        scenario.terrorist = t;
        const ScenarioResult run = run_scenario(calm, scenario, grid, params);
        const ChangeAnalysis analysis = classify_changes(run, 1e-9);
        ACCEPT_REQUIRE(std::abs(analysis.per_agent_dist.percent[static_cast<std::size_t>(
                           ChangeClass::no_change)] - 100.0) <= 1e-9,
                       "a no-threat run must be 100% no_change");
        ACCEPT_REQUIRE(std::abs(analysis.per_agent_time_dist.percent[static_cast<std::size_t>(
                           ChangeClass::no_change)] - 100.0) <= 1e-9,
                       "a no-threat run must be 100% no_change over times");
    }
}

}  // namespace

int main() {
    struct Entry {
        int number;
        std::string title;
        double limit_seconds;  // 0 = no limit
        std::function<void(double*)> run;
    };

    double simulate_seconds = 0.0;
    const std::vector<Entry> criteria = {
        {1, "position-attitude closed forms and monotonicity", 1.0,
         [](double*) { criterion_1(); }},
        {2, "segment-attitude brute-force equivalence", 5.0, [](double*) { criterion_2(); }},
        {3, "self-attitude is exactly 1", 0.0, [](double*) { criterion_3(); }},
        {4, "threat dynamics: worked update, epsilon floor, contraction", 10.0,
         [](double*) { criterion_4(); }},
        {5, "mechanism directionality on constructed fixtures", 0.0,
         [](double*) { criterion_5(); }},
        {6, "calibration self-consistency within the 7% band", 300.0,
         [](double*) { criterion_6(); }},
        {7, "end-to-end determinism and scale", 0.0,
         [&simulate_seconds](double*) { criterion_7(&simulate_seconds); }},
        {8, "change-classification percentages", 0.0, [](double*) { criterion_8(); }},
    };

    int failures = 0;
    for (const Entry& entry : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            entry.run(nullptr);
        } catch (const Failure& f) {
            ok = false;
            detail = f.detail;
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("unexpected error: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok && entry.limit_seconds > 0.0 && elapsed > entry.limit_seconds) {
            ok = false;
            detail = "runtime " + fmt_g17(elapsed) + " s exceeds " + fmt_g17(entry.limit_seconds) + " s";
        }
        std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", entry.number,
                    entry.title.c_str(), elapsed, detail.empty() ? "" : " - ", detail.c_str());
        std::fflush(stdout);
        failures += ok ? 0 : 1;
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
