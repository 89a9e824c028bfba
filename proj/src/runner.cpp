#include "culsim/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "culsim/analysis.hpp"
#include "culsim/serialization.hpp"
#include "culsim/text_io.hpp"

namespace culsim {

namespace {

using Json = nlohmann::ordered_json;

std::filesystem::path out_root() {
    if (const char* env = std::getenv("CULSIM_OUT_ROOT"); env != nullptr && *env != '\0') {
        return std::filesystem::path(env);
    }
    return std::filesystem::path("runs");
}

std::string snapshot_name(std::size_t t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snapshot_%03zu.csv", t);
    return buf;
}

void write_manifest(const RunConfig& config,
                    const std::string& subcommand,
                    const std::filesystem::path& out_dir,
                    std::vector<std::string> artifacts) {
    std::sort(artifacts.begin(), artifacts.end());
    Json manifest;
    manifest["schema"] = "culsim.manifest.v1";
    manifest["tool"] = "culsim";
    manifest["version"] = std::string(kToolVersion);
    manifest["subcommand"] = subcommand;
    manifest["seed"] = config.seed;
    manifest["seed_set"] = config.seed_set;
    manifest["config_hash"] = config_hash(config);
    manifest["artifacts"] = artifacts;
    atomic_write(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

Population resolve_population(const RunConfig& config) {
    if (config.population_path) {
        return load_population_csv(*config.population_path, config.params);
    }
    if (config.popspec.sigma > 0.0 && !config.seed_set) {
        throw ConfigError("seed required: population jitter is stochastic");
    }
    PopulationSpec spec = config.popspec;
    spec.seed = config.seed;
    return build_population(spec);
}

ScenarioSpec scenario_spec(const RunConfig& config, int n_worldviews) {
    ScenarioSpec spec;
    spec.n_messages = config.n_messages;
    spec.record_trace = config.record_trace;
    spec.terrorist = make_terrorist(n_worldviews, config.terrorist_group, config.params,
                                    config.terrorist_positive, config.terrorist_negative);
    return spec;
}

// Mean-attitude series per group; empty groups yield null entries.
Json mean_attitude_json(const ScenarioResult& result, int threads) {
    const Population& initial = result.snapshots.front();
    Json series = Json::object();
    for (int g = 0; g < initial.worldviews.size(); ++g) {
        if (initial.count_in_group(g) > 0 && initial.size() >= 2) {
            series[initial.worldviews.label(g)] = mean_attitude_toward_group(result, g, threads);
        } else {
            series[initial.worldviews.label(g)] = nullptr;
        }
    }
    return series;
}

Json stats_json(const PairwiseStats& stats, const Worldviews& worldviews) {
    Json out;
    Json group = Json::array();
    for (int obs = 0; obs < stats.n_groups; ++obs) {
        Json row = Json::array();
        for (int tgt = 0; tgt < stats.n_groups; ++tgt) {
            const PairwiseCell& cell = stats.at(obs, tgt);
            row.push_back(cell.present() ? Json(cell.mean) : Json(nullptr));
        }
        group.push_back(row);
    }
    out["groups"] = worldviews.labels;
    out["group_means"] = group;
    for (const ProtoKind kind : {ProtoKind::inclusive, ProtoKind::exclusive}) {
        Json rows = Json::array();
        for (int obs = 0; obs < stats.n_groups; ++obs) {
            Json row = Json::array();
            for (int tgt = 0; tgt < stats.n_groups; ++tgt) {
                const PairwiseCell& cell = stats.at(obs, tgt, kind);
                row.push_back(cell.present() ? Json(cell.mean) : Json(nullptr));
            }
            rows.push_back(row);
        }
        out[std::string("group_means_") + std::string(to_string(kind))] = rows;
    }
    return out;
}

std::string attitude_matrix_csv(const PairwiseStats& stats, const Worldviews& worldviews) {
    std::ostringstream out;
    out << "observer_group,target_group,target_kind,count,mean\n";
    for (int obs = 0; obs < stats.n_groups; ++obs) {
        for (int tgt = 0; tgt < stats.n_groups; ++tgt) {
            const auto row = [&](const char* kind_label, const PairwiseCell& cell) {
                out << worldviews.label(obs) << "," << worldviews.label(tgt) << "," << kind_label
                    << "," << cell.count << "," << (cell.present() ? fmt_g17(cell.mean) : "")
                    << "\n";
            };
            row("all", stats.at(obs, tgt));
            row("inclusive", stats.at(obs, tgt, ProtoKind::inclusive));
            row("exclusive", stats.at(obs, tgt, ProtoKind::exclusive));
        }
    }
    return out.str();
}

std::string change_distribution_csv(const ChangeAnalysis& analysis, const Worldviews& worldviews) {
    std::ostringstream out;
    out << "aggregation,observer_group,kind,count";
    for (int c = 0; c < kChangeClassCount; ++c) {
        out << "," << to_string(static_cast<ChangeClass>(c));
    }
    out << "\n";
    const auto table = [&](const char* name, const ChangeDistribution& dist) {
        out << name << ",all,all," << dist.total;
        for (int c = 0; c < kChangeClassCount; ++c) {
            out << "," << fmt_g17(dist.percent[static_cast<std::size_t>(c)]);
        }
        out << "\n";
        for (const auto& row : dist.rows) {
            out << name << "," << worldviews.label(row.group) << "," << to_string(row.kind) << ","
                << row.count;
            for (int c = 0; c < kChangeClassCount; ++c) {
                out << "," << fmt_g17(row.percent[static_cast<std::size_t>(c)]);
            }
            out << "\n";
        }
    };
    table("per_agent", analysis.per_agent_dist);
    table("per_agent_time", analysis.per_agent_time_dist);
    return out.str();
}

std::string condition_profile_csv(const ConditionProfile& profile, const Worldviews& worldviews) {
    std::ostringstream out;
    out << "group,count,mean_position,mean_margin_low,mean_margin_high,mean_attitude,"
        << "margin_high_larger,margin_high_smaller,margin_low_larger,position_lower,attitude_higher\n";
    for (int g = 0; g < static_cast<int>(profile.groups.size()); ++g) {
        const auto& s = profile.groups[static_cast<std::size_t>(g)];
        const auto& f = profile.flags[static_cast<std::size_t>(g)];
        out << worldviews.label(g) << "," << s.count << "," << fmt_g17(s.mean_position) << ","
            << fmt_g17(s.mean_margin_low) << "," << fmt_g17(s.mean_margin_high) << ","
            << fmt_g17(s.mean_attitude) << "," << (f.margin_high_larger ? "true" : "false") << ","
            << (f.margin_high_smaller ? "true" : "false") << ","
            << (f.margin_low_larger ? "true" : "false") << "," << (f.position_lower ? "true" : "false")
            << "," << (f.attitude_higher ? "true" : "false") << "\n";
    }
    const auto& p = profile.population;
    out << "population," << p.count << "," << fmt_g17(p.mean_position) << ","
        << fmt_g17(p.mean_margin_low) << "," << fmt_g17(p.mean_margin_high) << ","
        << fmt_g17(p.mean_attitude) << ",,,,,\n";
    return out.str();
}

Json condition_profile_json(const ConditionProfile& profile, const Worldviews& worldviews) {
    Json out;
    out["worldview"] = worldviews.label(profile.worldview);
    out["favorable"] = profile.favorable;
    Json groups = Json::object();
    for (int g = 0; g < static_cast<int>(profile.groups.size()); ++g) {
        const auto& s = profile.groups[static_cast<std::size_t>(g)];
        const auto& f = profile.flags[static_cast<std::size_t>(g)];
        Json entry;
        entry["count"] = s.count;
        entry["mean_position"] = s.mean_position;
        entry["mean_margin_low"] = s.mean_margin_low;
        entry["mean_margin_high"] = s.mean_margin_high;
        entry["mean_attitude"] = s.mean_attitude;
        entry["margin_high_larger"] = f.margin_high_larger;
        entry["margin_high_smaller"] = f.margin_high_smaller;
        entry["margin_low_larger"] = f.margin_low_larger;
        entry["position_lower"] = f.position_lower;
        entry["attitude_higher"] = f.attitude_higher;
        groups[worldviews.label(g)] = entry;
    }
    out["groups"] = groups;
    Json pop;
    pop["count"] = profile.population.count;
    pop["mean_position"] = profile.population.mean_position;
    pop["mean_margin_low"] = profile.population.mean_margin_low;
    pop["mean_margin_high"] = profile.population.mean_margin_high;
    pop["mean_attitude"] = profile.population.mean_attitude;
    out["population"] = pop;
    return out;
}

Json change_distribution_json(const ChangeDistribution& dist, const Worldviews& worldviews) {
    Json out;
    out["total"] = dist.total;
    Json all = Json::object();
    for (int c = 0; c < kChangeClassCount; ++c) {
        all[std::string(to_string(static_cast<ChangeClass>(c)))] =
            dist.percent[static_cast<std::size_t>(c)];
    }
    out["percent"] = all;
    Json rows = Json::array();
    for (const auto& row : dist.rows) {
        Json r;
        r["group"] = worldviews.label(row.group);
        r["kind"] = std::string(to_string(row.kind));
        r["count"] = row.count;
        Json pct = Json::object();
        for (int c = 0; c < kChangeClassCount; ++c) {
            pct[std::string(to_string(static_cast<ChangeClass>(c)))] =
                row.percent[static_cast<std::size_t>(c)];
        }
        r["percent"] = pct;
        rows.push_back(r);
    }
    out["rows"] = rows;
    return out;
}

}  // namespace

std::filesystem::path resolve_out_dir(const RunConfig& config, const std::string& subcommand) {
    if (!config.out_dir.empty()) return std::filesystem::path(config.out_dir);
    const std::string name = subcommand + "_" + config_hash(config) + "_" + std::to_string(config.seed);
    return out_root() / name;
}

void run_simulate(const RunConfig& config, const std::filesystem::path& out_dir) {
    const Population population = resolve_population(config);
    population.require_valid();
    const ScenarioSpec spec = scenario_spec(config, population.worldviews.size());
    const Grid grid(config.params.d);
    const ScenarioResult result = run_scenario(population, spec, grid, config.params, config.threads);

    std::vector<std::string> artifacts;
    atomic_write(out_dir / "resolved_config.txt", semantic_config_text(config));
    artifacts.push_back("resolved_config.txt");

    for (std::size_t t = 0; t < result.snapshots.size(); ++t) {
        const std::string name = snapshot_name(t);
        save_population_csv(result.snapshots[t], out_dir / "snapshots" / name);
        artifacts.push_back("snapshots/" + name);
    }
    if (spec.record_trace) {
        atomic_write(out_dir / "trace.csv", trace_to_csv(result.trace, result.snapshots.front()));
        artifacts.push_back("trace.csv");
    }

    Json summary;
    summary["schema"] = "culsim.summary.v1";
    summary["n_messages"] = spec.n_messages;
    summary["groups"] = population.worldviews.labels;
    summary["mean_attitude"] = mean_attitude_json(result, config.threads);
    Json snapshots = Json::array();
    for (std::size_t t = 0; t < result.summaries.size(); ++t) {
        Json entry;
        entry["t"] = t;
        entry["attitudes"] = stats_json(result.summaries[t], population.worldviews);
        snapshots.push_back(entry);
    }
    summary["snapshots"] = snapshots;
    atomic_write(out_dir / "summary.json", summary.dump(2) + "\n");
    artifacts.push_back("summary.json");

    write_manifest(config, "simulate", out_dir, std::move(artifacts));
}

void run_synthesize(const RunConfig& config, const std::filesystem::path& out_dir) {
    if (!config.reference_path) {
        throw ConfigError("synthesize requires a reference indicator file (key: reference)");
    }
    if (!config.seed_set) {
        throw ConfigError("seed required: the calibration search is stochastic");
    }
    const IndicatorMatrix reference =
        load_indicators_csv(*config.reference_path, config.popspec.worldviews);
    PopulationSpec base = config.popspec;
    base.seed = config.seed;
    const FitResult result = fit(reference, base, config.search, config.seed);

    std::vector<std::string> artifacts;
    atomic_write(out_dir / "resolved_config.txt", semantic_config_text(config));
    artifacts.push_back("resolved_config.txt");
    atomic_write(out_dir / "fit_result.txt", fitresult_to_text(result, base));
    artifacts.push_back("fit_result.txt");

    if (!result.candidates.empty()) {
        const FitCandidate& best = result.candidates.front();
        atomic_write(out_dir / "best_spec.txt", popspec_to_text(best.spec));
        artifacts.push_back("best_spec.txt");
        save_population_csv(build_population(best.spec), out_dir / "best_population.csv");
        artifacts.push_back("best_population.csv");
        save_indicators_csv(reference, config.popspec.worldviews, out_dir / "reference.csv");
        artifacts.push_back("reference.csv");
    }

    write_manifest(config, "synthesize", out_dir, std::move(artifacts));
}

void run_analyze(const RunConfig& config, const std::filesystem::path& out_dir) {
    if (!config.run_path) {
        throw ConfigError("analyze requires a stored simulate run (key: run)");
    }
    const std::filesystem::path run_dir = *config.run_path;
    const RunConfig run_config = load_config(run_dir / "resolved_config.txt");

    ScenarioResult result;
    result.spec = scenario_spec(run_config, run_config.popspec.worldviews.size());
    for (std::size_t t = 0;; ++t) {
        const std::filesystem::path snap = run_dir / "snapshots" / snapshot_name(t);
        if (!std::filesystem::exists(snap)) break;
        result.snapshots.push_back(load_population_csv(snap, run_config.params));
    }
    if (result.snapshots.empty()) {
        throw ConfigError("run directory has no snapshots: " + run_dir.string());
    }
    const Grid grid(run_config.params.d);

    std::vector<std::string> artifacts;
    atomic_write(out_dir / "resolved_config.txt", semantic_config_text(run_config));
    artifacts.push_back("resolved_config.txt");

    Json summary;
    summary["schema"] = "culsim.analysis.v1";
    summary["run"] = run_dir.filename().string();
    summary["groups"] = result.snapshots.front().worldviews.labels;
    summary["tau"] = config.tau;

    Json matrices = Json::array();
    for (std::size_t t = 0; t < result.snapshots.size(); ++t) {
        const PairwiseStats stats =
            attitude_matrix(result.snapshots[t], grid, run_config.params, config.threads);
        char name[40];
        std::snprintf(name, sizeof(name), "attitude_matrix_%03zu.csv", t);
        atomic_write(out_dir / name, attitude_matrix_csv(stats, result.snapshots[t].worldviews));
        artifacts.push_back(name);
        Json entry;
        entry["t"] = t;
        entry["attitudes"] = stats_json(stats, result.snapshots[t].worldviews);
        matrices.push_back(entry);
    }
    summary["snapshots"] = matrices;
    summary["mean_attitude"] = mean_attitude_json(result, config.threads);

    if (result.snapshots.size() >= 2) {
        const ChangeAnalysis changes = classify_changes(result, config.tau, config.threads);
        atomic_write(out_dir / "change_distribution.csv",
                     change_distribution_csv(changes, result.snapshots.front().worldviews));
        artifacts.push_back("change_distribution.csv");
        Json ch;
        ch["per_agent"] = change_distribution_json(changes.per_agent_dist,
                                                   result.snapshots.front().worldviews);
        ch["per_agent_time"] = change_distribution_json(changes.per_agent_time_dist,
                                                        result.snapshots.front().worldviews);
        ch["inclusive_axis_present"] = changes.inclusive_axis_present;
        ch["exclusive_axis_present"] = changes.exclusive_axis_present;
        summary["changes"] = ch;
    }

    const ConditionProfile profile =
        condition_profile(result.snapshots.front(), grid, run_config.params,
                          result.spec.terrorist.main_worldview, config.threads);
    atomic_write(out_dir / "condition_profile.csv",
                 condition_profile_csv(profile, result.snapshots.front().worldviews));
    artifacts.push_back("condition_profile.csv");
    summary["condition_profile"] = condition_profile_json(profile, result.snapshots.front().worldviews);

    atomic_write(out_dir / "analysis_summary.json", summary.dump(2) + "\n");
    artifacts.push_back("analysis_summary.json");

    write_manifest(run_config, "analyze", out_dir, std::move(artifacts));
}

void run_sweep(const RunConfig& config, const std::filesystem::path& out_dir) {
    const int group = config.popspec.worldviews.index_of(config.sweep_parameter.substr(2));
    if (group < 0) throw ConfigError("sweep.parameter names an unknown group");
    if (config.popspec.sigma > 0.0 && !config.seed_set) {
        throw ConfigError("seed required: population jitter is stochastic");
    }

    const Grid grid(config.params.d);
    std::ostringstream table;
    std::string column = config.sweep_parameter;
    std::replace(column.begin(), column.end(), '.', '_');
    table << column;
    const Worldviews& wv = config.popspec.worldviews;
    for (int g = 0; g < wv.size(); ++g) {
        table << ",mean_" << wv.label(g) << "_t0,mean_" << wv.label(g) << "_final,delta_"
              << wv.label(g);
    }
    table << "\n";

    for (const double value : config.sweep_values) {
        PopulationSpec spec = config.popspec;
        spec.seed = config.seed;
        spec.x_inclusive[static_cast<std::size_t>(group)] = value;
        const Population population = build_population(spec);
        const ScenarioSpec scenario = scenario_spec(config, wv.size());
        ScenarioSpec quiet = scenario;
        quiet.record_trace = false;
        const ScenarioResult result = run_scenario(population, quiet, grid, config.params, config.threads);
        table << fmt_g17(value);
        for (int g = 0; g < wv.size(); ++g) {
            if (population.count_in_group(g) > 0 && population.size() >= 2) {
                const auto series = mean_attitude_toward_group(result, g, config.threads);
                table << "," << fmt_g17(series.front()) << "," << fmt_g17(series.back()) << ","
                      << fmt_g17(series.back() - series.front());
            } else {
                table << ",,,";
            }
        }
        table << "\n";
    }

    std::vector<std::string> artifacts;
    atomic_write(out_dir / "resolved_config.txt", semantic_config_text(config));
    artifacts.push_back("resolved_config.txt");
    atomic_write(out_dir / "sweep.csv", table.str());
    artifacts.push_back("sweep.csv");
    write_manifest(config, "sweep", out_dir, std::move(artifacts));
}

}  // namespace culsim
