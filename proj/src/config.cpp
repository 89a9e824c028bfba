#include "culsim/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "culsim/text_io.hpp"

namespace culsim {

namespace {

constexpr std::string_view kConfigSchema = "culsim.config.v1";

AcceptanceSegment seg(double position, double lower, double upper) {
    return AcceptanceSegment{position, lower, upper};
}

}  // namespace

std::vector<Prototype> example_prototypes(const Worldviews& worldviews) {
    if (worldviews.size() != 3) {
        throw ConfigError("example prototypes are defined for exactly 3 worldviews");
    }
    // Rows per group: own-worldview segment first conceptually, stored in
    // worldview order. Exclusive identities sit on the positive side for the
    // own worldview and on the negative side elsewhere; inclusive ones keep
    // near-zero, mostly-positive segments toward the other worldviews.
    std::vector<Prototype> protos(6);
    const auto set = [&](int group, ProtoKind kind, AcceptanceSegment s0, AcceptanceSegment s1,
                         AcceptanceSegment s2) {
        Prototype p;
        p.group = group;
        p.kind = kind;
        p.identity.segments = {s0, s1, s2};
        protos[PopulationSpec::proto_index(group, kind)] = std::move(p);
    };
    set(0, ProtoKind::inclusive, seg(0.6, 0.1, 0.9), seg(0.15, -0.1, 0.55), seg(0.1, -0.15, 0.45));
    set(0, ProtoKind::exclusive, seg(0.7, 0.2, 0.9), seg(-0.5, -0.8, -0.1), seg(-0.4, -0.7, -0.1));
    set(1, ProtoKind::inclusive, seg(0.2, -0.1, 0.6), seg(0.65, 0.15, 0.9), seg(0.1, -0.2, 0.5));
    set(1, ProtoKind::exclusive, seg(-0.45, -0.75, -0.1), seg(0.75, 0.25, 0.95), seg(-0.5, -0.85, -0.15));
    set(2, ProtoKind::inclusive, seg(0.15, -0.15, 0.5), seg(0.2, -0.05, 0.55), seg(0.7, 0.2, 0.9));
    set(2, ProtoKind::exclusive, seg(-0.55, -0.85, -0.2), seg(-0.5, -0.8, -0.15), seg(0.8, 0.3, 0.95));
    return protos;
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.popspec.n = 1000;
    cfg.popspec.worldviews = Worldviews{};
    cfg.popspec.shares = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    cfg.popspec.x_inclusive = {0.5, 0.5, 0.5};
    cfg.popspec.prototypes = example_prototypes(cfg.popspec.worldviews);
    cfg.popspec.sigma = 0.0;
    cfg.popspec.params = cfg.params;
    return cfg;
}

namespace {

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (const std::string& part : split(text, ',')) {
        out.push_back(parse_double(part));
    }
    return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
    RunConfig cfg = default_config();
    const Worldviews& wv = cfg.popspec.worldviews;

    std::map<std::string, std::string> entries;
    for (const KvEntry& e : parse_kv_text(text)) {
        if (!entries.emplace(e.key, e.value).second) {
            throw ConfigError("duplicate key: " + e.key);
        }
    }

    const auto wrap = [](const std::string& key, const std::function<void(const std::string&)>& fn,
                         const std::string& value) {
        try {
            fn(value);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(key + ": " + e.what());
        }
    };

    std::map<std::string, std::function<void(const std::string&)>> handlers;
    handlers["schema"] = [&](const std::string& v) {
        if (v != kConfigSchema) throw ConfigError("unsupported schema '" + v + "'");
    };
    handlers["alpha"] = [&](const std::string& v) { cfg.params.alpha = parse_double(v); };
    handlers["epsilon"] = [&](const std::string& v) { cfg.params.epsilon = parse_double(v); };
    handlers["d"] = [&](const std::string& v) { cfg.params.d = static_cast<int>(parse_int(v)); };
    handlers["eq2_normalizer"] = [&](const std::string& v) { cfg.params.eq2_normalizer = parse_double(v); };
    handlers["threat_all_worldviews"] = [&](const std::string& v) {
        cfg.params.threat_all_worldviews = parse_bool(v);
    };
    handlers["n_messages"] = [&](const std::string& v) { cfg.n_messages = static_cast<int>(parse_int(v)); };
    handlers["record_trace"] = [&](const std::string& v) { cfg.record_trace = parse_bool(v); };
    handlers["terrorist.group"] = [&](const std::string& v) {
        cfg.terrorist_group = wv.index_of(trim(v));
        if (cfg.terrorist_group < 0) throw ConfigError("unknown group '" + v + "'");
    };
    handlers["terrorist.positive"] = [&](const std::string& v) { cfg.terrorist_positive = parse_double(v); };
    handlers["terrorist.negative"] = [&](const std::string& v) { cfg.terrorist_negative = parse_double(v); };
    handlers["n"] = [&](const std::string& v) { cfg.popspec.n = static_cast<int>(parse_int(v)); };
    handlers["sigma"] = [&](const std::string& v) { cfg.popspec.sigma = parse_double(v); };
    handlers["seed"] = [&](const std::string& v) {
        cfg.seed = parse_u64(v);
        cfg.seed_set = true;
    };
    handlers["out"] = [&](const std::string& v) {
        cfg.out_dir = (base_dir / v).lexically_normal().string();
    };
    handlers["threads"] = [&](const std::string& v) { cfg.threads = static_cast<int>(parse_int(v)); };
    handlers["tau"] = [&](const std::string& v) {
        cfg.tau = parse_double(v);
        if (cfg.tau < 0.0) throw ConfigError("tau must be >= 0");
    };
    handlers["population"] = [&](const std::string& v) { cfg.population_path = base_dir / v; };
    handlers["reference"] = [&](const std::string& v) { cfg.reference_path = base_dir / v; };
    handlers["run"] = [&](const std::string& v) { cfg.run_path = base_dir / v; };
    handlers["fit.starts"] = [&](const std::string& v) {
        cfg.search.n_starts = static_cast<int>(parse_int(v));
    };
    handlers["fit.refine_evals"] = [&](const std::string& v) { cfg.search.refine_evals = parse_int(v); };
    handlers["fit.climbers"] = [&](const std::string& v) {
        cfg.search.n_climb = static_cast<int>(parse_int(v));
    };
    handlers["fit.top"] = [&](const std::string& v) { cfg.search.top_p = static_cast<int>(parse_int(v)); };
    handlers["fit.n"] = [&](const std::string& v) { cfg.search.fit_n = static_cast<int>(parse_int(v)); };
    handlers["sweep.parameter"] = [&](const std::string& v) { cfg.sweep_parameter = trim(v); };
    handlers["sweep.values"] = [&](const std::string& v) { cfg.sweep_values = parse_double_list(v); };
    for (int g = 0; g < wv.size(); ++g) {
        const int group = g;
        handlers["share." + wv.label(g)] = [&cfg, group](const std::string& v) {
            cfg.popspec.shares[static_cast<std::size_t>(group)] = parse_double(v);
        };
        handlers["x." + wv.label(g)] = [&cfg, group](const std::string& v) {
            cfg.popspec.x_inclusive[static_cast<std::size_t>(group)] = parse_double(v);
        };
        for (const ProtoKind kind : {ProtoKind::inclusive, ProtoKind::exclusive}) {
            for (int w = 0; w < wv.size(); ++w) {
                const int worldview = w;
                const std::string key = "proto." + wv.label(g) + "." + std::string(to_string(kind))
                                        + "." + wv.label(w);
                const std::size_t pi = PopulationSpec::proto_index(g, kind);
                handlers[key] = [&cfg, pi, worldview, key](const std::string& v) {
                    std::vector<std::string> nums;
                    for (const std::string& part : split(trim(v), ' ')) {
                        if (!trim(part).empty()) nums.push_back(trim(part));
                    }
                    if (nums.size() != 3) {
                        throw ConfigError(key + " must hold three numbers: position lower upper");
                    }
                    cfg.popspec.prototypes[pi].identity.segments[static_cast<std::size_t>(worldview)] =
                        AcceptanceSegment{parse_double(nums[0]), parse_double(nums[1]),
                                          parse_double(nums[2])};
                };
            }
        }
    }

    for (const auto& [key, value] : entries) {
        const auto it = handlers.find(key);
        if (it == handlers.end()) throw ConfigError("unknown key: " + key);
        wrap(key, it->second, value);
    }

    // Validation with key-level messages.
    try {
        cfg.params.require_valid();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (cfg.n_messages < 0) throw ConfigError("n_messages must be >= 0");
    if (cfg.search.n_starts < 1) throw ConfigError("fit.starts must be >= 1");
    if (cfg.search.refine_evals < 0) throw ConfigError("fit.refine_evals must be >= 0");
    if (cfg.search.top_p < 1) throw ConfigError("fit.top must be >= 1");
    if (cfg.search.fit_n < 2) throw ConfigError("fit.n must be >= 2");
    if (cfg.search.n_climb < 0) throw ConfigError("fit.climbers must be >= 0");
    if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
    if (!(cfg.terrorist_positive > cfg.terrorist_negative)) {
        throw ConfigError("terrorist.positive must exceed terrorist.negative");
    }
    if (cfg.sweep_parameter.rfind("x.", 0) != 0 || wv.index_of(cfg.sweep_parameter.substr(2)) < 0) {
        throw ConfigError("sweep.parameter must name a per-group inclusive fraction (x.M, x.C or x.A)");
    }
    if (cfg.sweep_values.empty()) throw ConfigError("sweep.values must not be empty");
    for (const double v : cfg.sweep_values) {
        if (v < 0.0 || v > 1.0) throw ConfigError("sweep.values entries must lie in [0, 1]");
    }
    cfg.popspec.params = cfg.params;
    try {
        cfg.popspec.require_valid();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    cfg.search.threads = cfg.threads;

    for (const auto& path : {cfg.population_path, cfg.reference_path, cfg.run_path}) {
        if (path && !std::filesystem::exists(*path)) {
            throw ConfigError("referenced file does not exist: " + path->string());
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    const std::filesystem::path base =
        path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return parse_config_text(text, base);
}

std::string semantic_config_text(const RunConfig& config) {
    std::ostringstream out;
    out << "schema = " << kConfigSchema << "\n";
    out << "alpha = " << fmt_g17(config.params.alpha) << "\n";
    out << "epsilon = " << fmt_g17(config.params.epsilon) << "\n";
    out << "d = " << config.params.d << "\n";
    out << "eq2_normalizer = " << fmt_g17(config.params.eq2_normalizer) << "\n";
    out << "threat_all_worldviews = " << (config.params.threat_all_worldviews ? "true" : "false") << "\n";
    out << "n_messages = " << config.n_messages << "\n";
    out << "record_trace = " << (config.record_trace ? "true" : "false") << "\n";
    out << "terrorist.group = " << config.popspec.worldviews.label(config.terrorist_group) << "\n";
    out << "terrorist.positive = " << fmt_g17(config.terrorist_positive) << "\n";
    out << "terrorist.negative = " << fmt_g17(config.terrorist_negative) << "\n";
    out << "tau = " << fmt_g17(config.tau) << "\n";
    out << "seed = " << config.seed << "\n";
    out << "n = " << config.popspec.n << "\n";
    out << "sigma = " << fmt_g17(config.popspec.sigma) << "\n";
    const Worldviews& wv = config.popspec.worldviews;
    for (int g = 0; g < wv.size(); ++g) {
        out << "share." << wv.label(g) << " = "
            << fmt_g17(config.popspec.shares[static_cast<std::size_t>(g)]) << "\n";
    }
    for (int g = 0; g < wv.size(); ++g) {
        out << "x." << wv.label(g) << " = "
            << fmt_g17(config.popspec.x_inclusive[static_cast<std::size_t>(g)]) << "\n";
    }
    for (const Prototype& proto : config.popspec.prototypes) {
        for (int w = 0; w < wv.size(); ++w) {
            const AcceptanceSegment& s = proto.identity.segment(w);
            out << "proto." << wv.label(proto.group) << "." << to_string(proto.kind) << "."
                << wv.label(w) << " = " << fmt_g17(s.position) << " " << fmt_g17(s.lower) << " "
                << fmt_g17(s.upper) << "\n";
        }
    }
    out << "fit.starts = " << config.search.n_starts << "\n";
    out << "fit.refine_evals = " << config.search.refine_evals << "\n";
    out << "fit.climbers = " << config.search.n_climb << "\n";
    out << "fit.top = " << config.search.top_p << "\n";
    out << "fit.n = " << config.search.fit_n << "\n";
    out << "sweep.parameter = " << config.sweep_parameter << "\n";
    out << "sweep.values = ";
    for (std::size_t i = 0; i < config.sweep_values.size(); ++i) {
        if (i > 0) out << ",";
        out << fmt_g17(config.sweep_values[i]);
    }
    out << "\n";
    return out.str();
}

std::string config_hash(const RunConfig& config) {
    const std::string text = semantic_config_text(config);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

}  // namespace culsim
