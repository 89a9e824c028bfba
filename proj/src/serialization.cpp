#include "culsim/serialization.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "culsim/text_io.hpp"

namespace culsim {

namespace {

constexpr std::string_view kPopSpecSchema = "culsim.popspec.v1";
constexpr std::string_view kFitResultSchema = "culsim.fitresult.v1";

void require_plain_label(const std::string& label) {
    if (label.empty()) throw std::invalid_argument("empty worldview label");
    for (const char c : label) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
            throw std::invalid_argument("worldview label must be alphanumeric: '" + label + "'");
        }
    }
}

std::string worldview_list(const Worldviews& worldviews) {
    std::string out;
    for (int i = 0; i < worldviews.size(); ++i) {
        require_plain_label(worldviews.label(i));
        if (i > 0) out += ",";
        out += worldviews.label(i);
    }
    return out;
}

Worldviews worldviews_from_list(const std::string& text) {
    Worldviews out;
    out.labels.clear();
    for (const std::string& part : split(text, ',')) {
        const std::string label = trim(part);
        require_plain_label(label);
        if (out.index_of(label) >= 0) throw std::invalid_argument("duplicate worldview label: " + label);
        out.labels.push_back(label);
    }
    if (out.size() < 2) throw std::invalid_argument("need at least 2 worldviews");
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Population CSV
// ---------------------------------------------------------------------------

std::string population_to_csv(const Population& population) {
    std::ostringstream out;
    out << "id,group,kind";
    for (int w = 0; w < population.worldviews.size(); ++w) {
        const std::string& label = population.worldviews.label(w);
        require_plain_label(label);
        out << ",a_" << label << ",b_" << label << ",B_" << label;
    }
    out << "\n";
    for (const Agent& agent : population.agents) {
        out << agent.id << "," << population.worldviews.label(agent.group) << ","
            << to_string(agent.kind);
        for (const AcceptanceSegment& seg : agent.identity.segments) {
            out << "," << fmt_g17(seg.position) << "," << fmt_g17(seg.lower) << ","
                << fmt_g17(seg.upper);
        }
        out << "\n";
    }
    return out.str();
}

Population population_from_csv(const std::string& text, const ModelParams& params) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("population csv is empty");
    const std::vector<std::string> header = split(trim(line), ',');
    if (header.size() < 6 || header[0] != "id" || header[1] != "group" || header[2] != "kind"
        || (header.size() - 3) % 3 != 0) {
        throw std::invalid_argument("population csv header must be id,group,kind then a_X,b_X,B_X triples");
    }
    Worldviews worldviews;
    worldviews.labels.clear();
    for (std::size_t c = 3; c < header.size(); c += 3) {
        const std::string label = header[c].substr(2);
        if (header[c] != "a_" + label || header[c + 1] != "b_" + label || header[c + 2] != "B_" + label) {
            throw std::invalid_argument("population csv header has a malformed worldview triple near '"
                                        + header[c] + "'");
        }
        worldviews.labels.push_back(label);
    }

    Population pop;
    pop.worldviews = worldviews;
    pop.params = params;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split(trim(line), ',');
        if (cells.size() != header.size()) {
            throw std::invalid_argument("population csv line " + std::to_string(line_no)
                                        + " has " + std::to_string(cells.size()) + " cells");
        }
        Agent agent;
        agent.id = static_cast<int>(parse_int(cells[0]));
        agent.group = worldviews.index_of(cells[1]);
        if (agent.group < 0) {
            throw std::invalid_argument("population csv line " + std::to_string(line_no)
                                        + ": unknown group '" + cells[1] + "'");
        }
        agent.kind = proto_kind_from_string(cells[2]);
        for (int w = 0; w < worldviews.size(); ++w) {
            const std::size_t c = 3 + static_cast<std::size_t>(w) * 3;
            agent.identity.segments.push_back(AcceptanceSegment{
                parse_double(cells[c]), parse_double(cells[c + 1]), parse_double(cells[c + 2])});
        }
        pop.agents.push_back(std::move(agent));
    }
    pop.require_valid();
    return pop;
}

void save_population_csv(const Population& population, const std::filesystem::path& path) {
    atomic_write(path, population_to_csv(population));
}

Population load_population_csv(const std::filesystem::path& path, const ModelParams& params) {
    return population_from_csv(read_file(path), params);
}

// ---------------------------------------------------------------------------
// Indicator CSV
// ---------------------------------------------------------------------------

std::string indicators_to_csv(const IndicatorMatrix& matrix, const Worldviews& worldviews) {
    if (matrix.n_groups != worldviews.size()) {
        throw std::invalid_argument("indicator matrix does not match the worldview count");
    }
    std::ostringstream out;
    out << "observer_group,target_group,mean,std\n";
    for (int obs = 0; obs < matrix.n_groups; ++obs) {
        for (int tgt = 0; tgt < matrix.n_groups; ++tgt) {
            out << worldviews.label(obs) << "," << worldviews.label(tgt) << ","
                << fmt_g17(matrix.mean_at(obs, tgt)) << "," << fmt_g17(matrix.std_at(obs, tgt)) << "\n";
        }
    }
    return out.str();
}

IndicatorMatrix indicators_from_csv(const std::string& text, const Worldviews& worldviews) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "observer_group,target_group,mean,std") {
        throw std::invalid_argument("indicator csv header must be observer_group,target_group,mean,std");
    }
    const int g = worldviews.size();
    IndicatorMatrix m;
    m.n_groups = g;
    m.mean.assign(static_cast<std::size_t>(g) * static_cast<std::size_t>(g), 0.0);
    m.stddev.assign(m.mean.size(), 0.0);
    std::vector<bool> seen(m.mean.size(), false);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split(trim(line), ',');
        if (cells.size() != 4) {
            throw std::invalid_argument("indicator csv line " + std::to_string(line_no)
                                        + " must have 4 cells");
        }
        const int obs = worldviews.index_of(cells[0]);
        const int tgt = worldviews.index_of(cells[1]);
        if (obs < 0 || tgt < 0) {
            throw std::invalid_argument("indicator csv line " + std::to_string(line_no)
                                        + ": unknown group");
        }
        const std::size_t cell = static_cast<std::size_t>(obs * g + tgt);
        if (seen[cell]) {
            throw std::invalid_argument("indicator csv line " + std::to_string(line_no)
                                        + ": duplicate group pair");
        }
        const double mean = parse_double(cells[2]);
        const double stddev = parse_double(cells[3]);
        if (mean < -1.0 || mean > 1.0 || stddev < 0.0 || stddev > 1.0) {
            throw std::invalid_argument("indicator csv line " + std::to_string(line_no)
                                        + ": values out of range (means in [-1,1], std in [0,1])");
        }
        m.mean[cell] = mean;
        m.stddev[cell] = stddev;
        seen[cell] = true;
    }
    for (const bool s : seen) {
        if (!s) throw std::invalid_argument("indicator csv is missing group pairs");
    }
    return m;
}

void save_indicators_csv(const IndicatorMatrix& matrix,
                         const Worldviews& worldviews,
                         const std::filesystem::path& path) {
    atomic_write(path, indicators_to_csv(matrix, worldviews));
}

IndicatorMatrix load_indicators_csv(const std::filesystem::path& path, const Worldviews& worldviews) {
    return indicators_from_csv(read_file(path), worldviews);
}

// ---------------------------------------------------------------------------
// Trace CSV
// ---------------------------------------------------------------------------

std::string trace_to_csv(const std::vector<ThreatUpdateRecord>& trace, const Population& initial) {
    std::unordered_map<int, const Agent*> by_id;
    by_id.reserve(initial.agents.size());
    for (const Agent& a : initial.agents) by_id.emplace(a.id, &a);

    std::ostringstream out;
    out << "t,agent_id,group,prototype,omega_qi,mu,worldview,side,bound_before,bound_after\n";
    for (const ThreatUpdateRecord& rec : trace) {
        const auto it = by_id.find(rec.agent_id);
        if (it == by_id.end()) throw std::invalid_argument("trace references an unknown agent id");
        const Agent& agent = *it->second;
        out << rec.message_index << "," << rec.agent_id << ","
            << initial.worldviews.label(agent.group) << "," << to_string(agent.kind) << ","
            << fmt_g17(rec.omega_qi) << "," << fmt_g17(rec.mu) << ","
            << initial.worldviews.label(rec.worldview) << "," << to_string(rec.side) << ","
            << fmt_g17(rec.bound_before) << "," << fmt_g17(rec.bound_after) << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// PopulationSpec / FitResult structured text
// ---------------------------------------------------------------------------

namespace {

void write_params_fields(std::ostringstream& out, const ModelParams& p, const std::string& prefix) {
    out << prefix << "alpha = " << fmt_g17(p.alpha) << "\n";
    out << prefix << "epsilon = " << fmt_g17(p.epsilon) << "\n";
    out << prefix << "d = " << p.d << "\n";
    out << prefix << "eq2_normalizer = " << fmt_g17(p.eq2_normalizer) << "\n";
    out << prefix << "threat_all_worldviews = " << (p.threat_all_worldviews ? "true" : "false") << "\n";
}

void write_base_fields(std::ostringstream& out, const PopulationSpec& spec, const std::string& prefix) {
    out << prefix << "worldviews = " << worldview_list(spec.worldviews) << "\n";
    out << prefix << "n = " << spec.n << "\n";
    out << prefix << "seed = " << spec.seed << "\n";
    out << prefix << "sigma = " << fmt_g17(spec.sigma) << "\n";
    write_params_fields(out, spec.params, prefix);
    for (int g = 0; g < spec.worldviews.size(); ++g) {
        out << prefix << "share." << spec.worldviews.label(g) << " = "
            << fmt_g17(spec.shares[static_cast<std::size_t>(g)]) << "\n";
    }
}

void write_mixture_fields(std::ostringstream& out, const PopulationSpec& spec, const std::string& prefix) {
    for (int g = 0; g < spec.worldviews.size(); ++g) {
        out << prefix << "x." << spec.worldviews.label(g) << " = "
            << fmt_g17(spec.x_inclusive[static_cast<std::size_t>(g)]) << "\n";
    }
    for (const Prototype& proto : spec.prototypes) {
        for (int w = 0; w < spec.worldviews.size(); ++w) {
            const AcceptanceSegment& seg = proto.identity.segment(w);
            out << prefix << "proto." << spec.worldviews.label(proto.group) << "."
                << to_string(proto.kind) << "." << spec.worldviews.label(w) << " = "
                << fmt_g17(seg.position) << " " << fmt_g17(seg.lower) << " " << fmt_g17(seg.upper)
                << "\n";
        }
    }
}

// Key/value lookup with consumption tracking so unknown keys can be rejected.
class KvReader {
public:
    explicit KvReader(const std::string& text) {
        for (const KvEntry& e : parse_kv_text(text)) {
            if (!entries_.emplace(e.key, e.value).second) {
                throw std::invalid_argument("duplicate key: " + e.key);
            }
        }
    }

    const std::string& require(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) throw std::invalid_argument("missing key: " + key);
        consumed_.insert(key);
        return it->second;
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    void require_all_consumed() const {
        for (const auto& [key, value] : entries_) {
            if (!consumed_.count(key)) throw std::invalid_argument("unknown key: " + key);
        }
    }

private:
    std::map<std::string, std::string> entries_;
    std::set<std::string> consumed_;
};

ModelParams read_params_fields(KvReader& kv, const std::string& prefix) {
    ModelParams p;
    p.alpha = parse_double(kv.require(prefix + "alpha"));
    p.epsilon = parse_double(kv.require(prefix + "epsilon"));
    p.d = static_cast<int>(parse_int(kv.require(prefix + "d")));
    p.eq2_normalizer = parse_double(kv.require(prefix + "eq2_normalizer"));
    p.threat_all_worldviews = parse_bool(kv.require(prefix + "threat_all_worldviews"));
    p.require_valid();
    return p;
}

PopulationSpec read_base_fields(KvReader& kv, const std::string& prefix) {
    PopulationSpec spec;
    spec.worldviews = worldviews_from_list(kv.require(prefix + "worldviews"));
    spec.n = static_cast<int>(parse_int(kv.require(prefix + "n")));
    spec.seed = parse_u64(kv.require(prefix + "seed"));
    spec.sigma = parse_double(kv.require(prefix + "sigma"));
    spec.params = read_params_fields(kv, prefix);
    spec.shares.clear();
    for (int g = 0; g < spec.worldviews.size(); ++g) {
        spec.shares.push_back(parse_double(kv.require(prefix + "share." + spec.worldviews.label(g))));
    }
    return spec;
}

void read_mixture_fields(KvReader& kv, const std::string& prefix, PopulationSpec& spec) {
    spec.x_inclusive.clear();
    for (int g = 0; g < spec.worldviews.size(); ++g) {
        spec.x_inclusive.push_back(parse_double(kv.require(prefix + "x." + spec.worldviews.label(g))));
    }
    spec.prototypes.clear();
    spec.prototypes.resize(static_cast<std::size_t>(2 * spec.worldviews.size()));
    for (int g = 0; g < spec.worldviews.size(); ++g) {
        for (const ProtoKind kind : {ProtoKind::inclusive, ProtoKind::exclusive}) {
            Prototype proto;
            proto.group = g;
            proto.kind = kind;
            for (int w = 0; w < spec.worldviews.size(); ++w) {
                const std::string key = prefix + "proto." + spec.worldviews.label(g) + "."
                                        + std::string(to_string(kind)) + "." + spec.worldviews.label(w);
                const std::vector<std::string> parts = split(trim(kv.require(key)), ' ');
                std::vector<std::string> nums;
                for (const auto& part : parts) {
                    if (!trim(part).empty()) nums.push_back(trim(part));
                }
                if (nums.size() != 3) {
                    throw std::invalid_argument(key + " must hold three numbers: position lower upper");
                }
                proto.identity.segments.push_back(AcceptanceSegment{
                    parse_double(nums[0]), parse_double(nums[1]), parse_double(nums[2])});
            }
            spec.prototypes[PopulationSpec::proto_index(g, kind)] = std::move(proto);
        }
    }
}

}  // namespace

std::string popspec_to_text(const PopulationSpec& spec) {
    std::ostringstream out;
    out << "schema = " << kPopSpecSchema << "\n";
    write_base_fields(out, spec, "");
    write_mixture_fields(out, spec, "");
    return out.str();
}

PopulationSpec popspec_from_text(const std::string& text) {
    KvReader kv(text);
    if (kv.require("schema") != kPopSpecSchema) {
        throw std::invalid_argument("unsupported population spec schema");
    }
    PopulationSpec spec = read_base_fields(kv, "");
    read_mixture_fields(kv, "", spec);
    kv.require_all_consumed();
    spec.require_valid();
    return spec;
}

std::string fitresult_to_text(const FitResult& result, const PopulationSpec& base) {
    std::ostringstream out;
    out << "schema = " << kFitResultSchema << "\n";
    out << "seed = " << result.seed << "\n";
    out << "evaluations = " << result.evaluations << "\n";
    out << "candidates = " << result.candidates.size() << "\n";
    write_base_fields(out, base, "base.");
    for (std::size_t i = 0; i < result.candidates.size(); ++i) {
        const FitCandidate& cand = result.candidates[i];
        const std::string prefix = "candidate." + std::to_string(i) + ".";
        out << prefix << "l1 = " << fmt_g17(cand.l1) << "\n";
        out << prefix << "avg_rel = " << fmt_g17(cand.avg_rel) << "\n";
        out << prefix << "max_rel = " << fmt_g17(cand.max_rel) << "\n";
        write_mixture_fields(out, cand.spec, prefix);
    }
    return out.str();
}

FitResult fitresult_from_text(const std::string& text) {
    KvReader kv(text);
    if (kv.require("schema") != kFitResultSchema) {
        throw std::invalid_argument("unsupported fit result schema");
    }
    FitResult result;
    result.seed = parse_u64(kv.require("seed"));
    result.evaluations = parse_int(kv.require("evaluations"));
    const long long n = parse_int(kv.require("candidates"));
    if (n < 0) throw std::invalid_argument("candidate count must be >= 0");
    const PopulationSpec base = read_base_fields(kv, "base.");
    result.candidates.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        const std::string prefix = "candidate." + std::to_string(i) + ".";
        FitCandidate cand;
        cand.spec = base;
        cand.l1 = parse_double(kv.require(prefix + "l1"));
        cand.avg_rel = parse_double(kv.require(prefix + "avg_rel"));
        cand.max_rel = parse_double(kv.require(prefix + "max_rel"));
        read_mixture_fields(kv, prefix, cand.spec);
        cand.spec.require_valid();
        result.candidates.push_back(std::move(cand));
    }
    kv.require_all_consumed();
    return result;
}

}  // namespace culsim
