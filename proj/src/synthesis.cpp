#include "culsim/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "culsim/attitude.hpp"
#include "culsim/parallel.hpp"
#include "culsim/rng.hpp"

namespace culsim {

void require_valid_prototype(const Prototype& proto,
                             const Worldviews& worldviews,
                             const ModelParams& params) {
    const int k = worldviews.size();
    if (proto.group < 0 || proto.group >= k) throw std::invalid_argument("prototype group out of range");
    if (proto.identity.size() != k) throw std::invalid_argument("prototype identity does not cover all worldviews");
    require_initialized(proto.identity, params.epsilon);
    if (group_of(proto.identity) != proto.group) {
        throw std::invalid_argument("prototype group label does not match its highest position ("
                                    + worldviews.label(proto.group) + ")");
    }
    const AcceptanceSegment& own = proto.identity.segment(proto.group);
    if (own.lower < 0.0) {
        throw std::invalid_argument("prototype own-group segment must lie in [0, 1]");
    }
    for (int w = 0; w < k; ++w) {
        if (w == proto.group) continue;
        const AcceptanceSegment& seg = proto.identity.segment(w);
        if (proto.kind == ProtoKind::exclusive) {
            if (seg.upper > 0.0) {
                throw std::invalid_argument("exclusive prototype segments toward other worldviews must lie in [-1, 0]");
            }
        } else {
            if (std::abs(seg.position) > kInclusiveOtherPositionCap) {
                throw std::invalid_argument("inclusive prototype positions toward other worldviews must be near zero");
            }
            if (seg.lower + seg.upper < 0.0) {
                throw std::invalid_argument("inclusive prototype segments toward other worldviews must be mostly positive");
            }
        }
    }
}

void PopulationSpec::require_valid() const {
    params.require_valid();
    const int k = worldviews.size();
    if (k < 2) throw std::invalid_argument("population spec needs at least 2 worldviews");
    if (params.epsilon > 0.5) throw std::invalid_argument("epsilon must be <= 0.5 to fit prototype segments");
    if (n < 0) throw std::invalid_argument("n must be >= 0");
    if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
    if (static_cast<int>(shares.size()) != k) throw std::invalid_argument("shares must list one value per group");
    if (static_cast<int>(x_inclusive.size()) != k) throw std::invalid_argument("x must list one value per group");
    double sum = 0.0;
    for (const double s : shares) {
        if (s < 0.0) throw std::invalid_argument("shares must be >= 0");
        sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("shares must sum to 1");
    for (const double x : x_inclusive) {
        if (x < 0.0 || x > 1.0) throw std::invalid_argument("x out of [0, 1]");
    }
    if (prototypes.size() != static_cast<std::size_t>(2 * k)) {
        throw std::invalid_argument("expected one prototype per (group, kind)");
    }
    for (int g = 0; g < k; ++g) {
        for (const ProtoKind kind : {ProtoKind::inclusive, ProtoKind::exclusive}) {
            const Prototype& p = prototypes[proto_index(g, kind)];
            if (p.group != g || p.kind != kind) {
                throw std::invalid_argument("prototypes out of canonical order (per group: inclusive, exclusive)");
            }
            require_valid_prototype(p, worldviews, params);
        }
    }
}

namespace {

std::vector<long long> largest_remainder(long long total, const std::vector<double>& weights) {
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<long long> counts(weights.size(), 0);
    std::vector<double> remainders(weights.size(), 0.0);
    long long assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double quota = total * (wsum > 0.0 ? weights[i] / wsum : 0.0);
        counts[i] = static_cast<long long>(std::floor(quota));
        remainders[i] = quota - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    const long long leftover = total - assigned;
    for (long long i = 0; i < leftover; ++i) {
        counts[order[static_cast<std::size_t>(i) % order.size()]] += 1;
    }
    return counts;
}

}  // namespace

std::vector<long long> prototype_counts(int n,
                                        const std::vector<double>& shares,
                                        const std::vector<double>& x_inclusive) {
    if (shares.size() != x_inclusive.size()) {
        throw std::invalid_argument("shares and x must have the same length");
    }
    const std::vector<long long> per_group = largest_remainder(n, shares);
    std::vector<long long> counts(shares.size() * 2, 0);
    for (std::size_t g = 0; g < shares.size(); ++g) {
        const std::vector<long long> split =
            largest_remainder(per_group[g], {x_inclusive[g], 1.0 - x_inclusive[g]});
        counts[g * 2] = split[0];
        counts[g * 2 + 1] = split[1];
    }
    return counts;
}

namespace {

void sort3(double& lo, double& mid, double& hi) {
    if (lo > mid) std::swap(lo, mid);
    if (mid > hi) std::swap(mid, hi);
    if (lo > mid) std::swap(lo, mid);
}

// Uniform perturbation of every segment value, then repair: reorder the
// triple, keep the own-group position positive, and clamp so that both
// margins stay at least epsilon wide inside [-1, 1].
void jitter_identity(CulturalIdentity& identity,
                     int own_group,
                     double sigma,
                     double eps,
                     RngStream& rng) {
    for (int k = 0; k < identity.size(); ++k) {
        AcceptanceSegment& seg = identity.segments[static_cast<std::size_t>(k)];
        double a = seg.position + rng.uniform(-sigma, sigma);
        double b = seg.lower + rng.uniform(-sigma, sigma);
        double c = seg.upper + rng.uniform(-sigma, sigma);
        sort3(b, a, c);
        const double lowest = (k == own_group) ? eps : -1.0 + eps;
        a = std::clamp(a, lowest, 1.0 - eps);
        b = std::clamp(b, -1.0, a - eps);
        c = std::clamp(c, a + eps, 1.0);
        seg = AcceptanceSegment{a, b, c};
    }
}

}  // namespace

Population build_population(const PopulationSpec& spec) {
    spec.require_valid();
    const std::vector<long long> counts = prototype_counts(spec.n, spec.shares, spec.x_inclusive);

    Population pop;
    pop.worldviews = spec.worldviews;
    pop.params = spec.params;
    pop.agents.reserve(static_cast<std::size_t>(spec.n));
    int id = 0;
    for (std::size_t p = 0; p < spec.prototypes.size(); ++p) {
        const Prototype& proto = spec.prototypes[p];
        for (long long c = 0; c < counts[p]; ++c) {
            Agent agent{id, proto.group, proto.kind, proto.identity};
            if (spec.sigma > 0.0) {
                RngStream rng(spec.seed, "jitter", static_cast<std::uint64_t>(id));
                jitter_identity(agent.identity, proto.group, spec.sigma, spec.params.epsilon, rng);
            }
            pop.agents.push_back(std::move(agent));
            ++id;
        }
    }
    return pop;
}

IndicatorMatrix compute_indicators(const Population& population,
                                   const Grid& grid,
                                   const ModelParams& params,
                                   int threads) {
    const int g = population.worldviews.size();
    for (int k = 0; k < g; ++k) {
        if (population.count_in_group(k) == 0) {
            throw std::invalid_argument("group " + population.worldviews.label(k) + " is empty");
        }
    }
    const PairwiseStats stats = pairwise_attitude_stats(population, grid, params, threads);
    IndicatorMatrix m;
    m.n_groups = g;
    m.mean.resize(static_cast<std::size_t>(g) * static_cast<std::size_t>(g));
    m.stddev.resize(m.mean.size());
    for (int obs = 0; obs < g; ++obs) {
        for (int tgt = 0; tgt < g; ++tgt) {
            const PairwiseCell& cell = stats.at(obs, tgt);
            if (!cell.present()) {
                throw std::invalid_argument("group " + population.worldviews.label(tgt)
                                            + " needs at least 2 agents for in-group indicators");
            }
            m.mean[static_cast<std::size_t>(obs * g + tgt)] = cell.mean;
            m.stddev[static_cast<std::size_t>(obs * g + tgt)] = cell.stddev;
        }
    }
    return m;
}

IndicatorMatrix indicators_from_prototypes(const std::vector<Prototype>& prototypes,
                                           const std::vector<long long>& counts,
                                           const Grid& grid,
                                           const ModelParams& params) {
    if (prototypes.empty() || prototypes.size() != counts.size()) {
        throw std::invalid_argument("prototypes and counts must align");
    }
    const int k = prototypes.front().identity.size();
    int n_groups = 0;
    for (const auto& p : prototypes) n_groups = std::max(n_groups, p.group + 1);
    n_groups = std::max(n_groups, k);

    const std::size_t np = prototypes.size();
    std::vector<ObserverTable> tables;
    tables.reserve(np);
    std::vector<std::pair<int, int>> ranges(np * static_cast<std::size_t>(k));
    for (std::size_t p = 0; p < np; ++p) {
        tables.emplace_back(prototypes[p].identity, grid);
        for (int w = 0; w < k; ++w) {
            const auto r = grid.interior_range(prototypes[p].identity.segment(w));
            if (r.first >= r.second) {
                throw DegenerateTargetSegment("prototype segment has no interior grid point");
            }
            ranges[p * static_cast<std::size_t>(k) + static_cast<std::size_t>(w)] = r;
        }
    }

    // Attitudes between the distinct identities; the expanded population
    // only repeats these values.
    std::vector<double> w(np * np, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
        for (std::size_t q = 0; q < np; ++q) {
            double sum = 0.0;
            for (int wv = 0; wv < k; ++wv) {
                const auto& r = ranges[q * static_cast<std::size_t>(k) + static_cast<std::size_t>(wv)];
                sum += tables[p].attitude_over_range(wv, r.first, r.second, params);
            }
            w[p * np + q] = sum / k;
        }
    }

    IndicatorMatrix m;
    m.n_groups = n_groups;
    m.mean.resize(static_cast<std::size_t>(n_groups) * static_cast<std::size_t>(n_groups));
    m.stddev.resize(m.mean.size());
    for (int obs = 0; obs < n_groups; ++obs) {
        for (int tgt = 0; tgt < n_groups; ++tgt) {
            double sum = 0.0;
            double sumsq = 0.0;
            long long total = 0;
            for (std::size_t p = 0; p < np; ++p) {
                if (prototypes[p].group != obs || counts[p] == 0) continue;
                for (std::size_t q = 0; q < np; ++q) {
                    if (prototypes[q].group != tgt || counts[q] == 0) continue;
                    const long long pairs = counts[p] * counts[q] - (p == q ? counts[p] : 0);
                    if (pairs <= 0) continue;
                    const double v = w[p * np + q];
                    sum += v * static_cast<double>(pairs);
                    sumsq += v * v * static_cast<double>(pairs);
                    total += pairs;
                }
            }
            if (total == 0) {
                throw std::invalid_argument("no agent pairs for an ordered group pair");
            }
            const double mean = sum / static_cast<double>(total);
            const double var = sumsq / static_cast<double>(total) - mean * mean;
            m.mean[static_cast<std::size_t>(obs * n_groups + tgt)] = mean;
            m.stddev[static_cast<std::size_t>(obs * n_groups + tgt)] = std::sqrt(var > 0.0 ? var : 0.0);
        }
    }
    return m;
}

Objective objective(const IndicatorMatrix& candidate, const IndicatorMatrix& reference) {
    if (candidate.n_groups != reference.n_groups) {
        throw std::invalid_argument("indicator matrices have different shapes");
    }
    Objective out;
    const int cells = candidate.n_groups * candidate.n_groups;
    for (int pass = 0; pass < 2; ++pass) {
        const std::vector<double>& c = pass == 0 ? candidate.mean : candidate.stddev;
        const std::vector<double>& r = pass == 0 ? reference.mean : reference.stddev;
        for (int i = 0; i < cells; ++i) {
            const double diff = std::abs(c[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)]);
            const double rel = diff / std::max(std::abs(r[static_cast<std::size_t>(i)]), 0.1);
            out.l1 += diff;
            out.avg_rel += rel;
            out.max_rel = std::max(out.max_rel, rel);
        }
    }
    out.avg_rel /= candidate.indicator_count();
    return out;
}

// ---------------------------------------------------------------------------
// Default optimizer
// ---------------------------------------------------------------------------

namespace {

// Search space over (position, lower width, upper width) per prototype
// segment plus the per-group inclusive fraction. Sampling boxes are static;
// the cross-coordinate constraints are enforced by decode().
struct FitSpace {
    int k = 0;                 // worldviews
    std::size_t n_protos = 0;  // 2 * k
    std::vector<double> lo;
    std::vector<double> hi;
    double eps = 0.05;

    explicit FitSpace(const PopulationSpec& base) {
        k = base.worldviews.size();
        n_protos = static_cast<std::size_t>(2 * k);
        eps = base.params.epsilon;
        const std::size_t dims = n_protos * static_cast<std::size_t>(k) * 3 + static_cast<std::size_t>(k);
        lo.assign(dims, 0.0);
        hi.assign(dims, 0.0);
        for (std::size_t p = 0; p < n_protos; ++p) {
            const int group = static_cast<int>(p / 2);
            const bool exclusive = (p % 2) == 1;
            for (int w = 0; w < k; ++w) {
                const std::size_t base_idx = (p * static_cast<std::size_t>(k) + static_cast<std::size_t>(w)) * 3;
                if (w == group) {
                    lo[base_idx] = eps;
                    hi[base_idx] = 1.0 - eps;
                } else if (exclusive) {
                    lo[base_idx] = -1.0 + eps;
                    hi[base_idx] = -eps;
                } else {
                    lo[base_idx] = -kInclusiveOtherPositionCap;
                    hi[base_idx] = kInclusiveOtherPositionCap;
                }
                lo[base_idx + 1] = eps;
                hi[base_idx + 1] = 1.0;
                lo[base_idx + 2] = eps;
                hi[base_idx + 2] = 1.0;
            }
        }
        for (int g = 0; g < k; ++g) {
            lo[dims - static_cast<std::size_t>(k) + static_cast<std::size_t>(g)] = 0.0;
            hi[dims - static_cast<std::size_t>(k) + static_cast<std::size_t>(g)] = 1.0;
        }
    }

    std::size_t dims() const { return lo.size(); }

    std::vector<double> sample(RngStream& rng) const {
        std::vector<double> genes(dims());
        for (std::size_t i = 0; i < dims(); ++i) genes[i] = rng.uniform(lo[i], hi[i]);
        return genes;
    }

    // Keeps inclusive non-own positions strictly below the own-group one so
    // the group label stays the highest position under the tie-break.
    static constexpr double kGroupGap = 1e-6;

    void decode_proto(const std::vector<double>& genes, std::size_t p, Prototype& proto) const {
        const int group = static_cast<int>(p / 2);
        const bool exclusive = (p % 2) == 1;
        proto.group = group;
        proto.kind = exclusive ? ProtoKind::exclusive : ProtoKind::inclusive;
        proto.identity.segments.assign(static_cast<std::size_t>(k), AcceptanceSegment{});

        const auto idx = [&](int w) {
            return (p * static_cast<std::size_t>(k) + static_cast<std::size_t>(w)) * 3;
        };
        // Own worldview first; the other positions are capped below it.
        const std::size_t own = idx(group);
        double a = std::clamp(genes[own], eps, 1.0 - eps);
        double wl = std::clamp(genes[own + 1], eps, a);
        double wh = std::clamp(genes[own + 2], eps, 1.0 - a);
        proto.identity.segments[static_cast<std::size_t>(group)] = AcceptanceSegment{a, a - wl, a + wh};
        const double own_a = a;

        for (int w = 0; w < k; ++w) {
            if (w == group) continue;
            const std::size_t b = idx(w);
            if (exclusive) {
                a = std::clamp(genes[b], -1.0 + eps, -eps);
                wl = std::clamp(genes[b + 1], eps, 1.0 + a);
                wh = std::clamp(genes[b + 2], eps, -a);
            } else {
                const double cap = std::min(kInclusiveOtherPositionCap, own_a - kGroupGap);
                a = std::clamp(genes[b], -kInclusiveOtherPositionCap, cap);
                wl = std::clamp(genes[b + 1], eps, 1.0 + a);
                // Midpoint of the segment stays >= 0 ("mostly positive").
                wh = std::clamp(genes[b + 2], std::max(eps, wl - 2.0 * a), 1.0 - a);
            }
            proto.identity.segments[static_cast<std::size_t>(w)] = AcceptanceSegment{a, a - wl, a + wh};
        }
    }

    void decode(const std::vector<double>& genes, const PopulationSpec& base, PopulationSpec& out) const {
        out = base;
        out.prototypes.assign(n_protos, Prototype{});
        for (std::size_t p = 0; p < n_protos; ++p) decode_proto(genes, p, out.prototypes[p]);
        out.x_inclusive.assign(static_cast<std::size_t>(k), 0.0);
        for (int g = 0; g < k; ++g) {
            out.x_inclusive[static_cast<std::size_t>(g)] =
                std::clamp(genes[dims() - static_cast<std::size_t>(k) + static_cast<std::size_t>(g)], 0.0, 1.0);
        }
    }
};

struct StartState {
    std::vector<double> genes;
    Objective obj;
};

}  // namespace

FitResult MultiStartHillClimber::fit(const IndicatorMatrix& reference,
                                     const PopulationSpec& base,
                                     std::uint64_t seed) const {
    base.params.require_valid();
    const int k = base.worldviews.size();
    if (k < 2) throw std::invalid_argument("fit needs at least 2 worldviews");
    if (reference.n_groups != k) throw std::invalid_argument("reference indicators do not match the worldview count");
    if (config_.n_starts < 1) throw std::invalid_argument("fit needs at least one start");
    if (config_.refine_evals < 0) throw std::invalid_argument("refine_evals must be >= 0");
    if (config_.top_p < 1) throw std::invalid_argument("top_p must be >= 1");
    if (static_cast<int>(base.shares.size()) != k || static_cast<int>(base.x_inclusive.size()) != k) {
        throw std::invalid_argument("base spec shares/x must list one value per group");
    }
    {
        // Every ordered group pair needs agent pairs at the evaluation size.
        const auto counts = prototype_counts(config_.fit_n, base.shares, base.x_inclusive);
        for (int g = 0; g < k; ++g) {
            if (counts[static_cast<std::size_t>(g * 2)] + counts[static_cast<std::size_t>(g * 2 + 1)] < 2) {
                throw std::invalid_argument("fit_n gives group " + base.worldviews.label(g)
                                            + " fewer than 2 agents");
            }
        }
    }

    const FitSpace space(base);
    const Grid grid(base.params.d);

    const auto evaluate = [&](const std::vector<double>& genes, PopulationSpec& scratch) {
        space.decode(genes, base, scratch);
        const auto counts = prototype_counts(config_.fit_n, base.shares, scratch.x_inclusive);
        const IndicatorMatrix m = indicators_from_prototypes(scratch.prototypes, counts, grid, base.params);
        return objective(m, reference);
    };

    std::vector<StartState> starts(static_cast<std::size_t>(config_.n_starts));
    parallel_for(starts.size(), config_.threads, [&](std::size_t i) {
        RngStream rng(seed, "fit.start", i);
        PopulationSpec scratch;
        starts[i].genes = space.sample(rng);
        starts[i].obj = evaluate(starts[i].genes, scratch);
    });
    long long evaluations = config_.n_starts;

    // Refine the most promising starts with coordinate-wise moves.
    std::vector<std::size_t> order(starts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return starts[a].obj.l1 < starts[b].obj.l1;
    });
    const int n_climb = std::min<int>(config_.n_climb, config_.n_starts);
    if (config_.refine_evals > 0 && n_climb > 0) {
        parallel_for(static_cast<std::size_t>(n_climb), config_.threads, [&](std::size_t r) {
            StartState& s = starts[order[r]];
            RngStream rng(seed, "fit.climb", r);
            PopulationSpec scratch;
            long long budget = config_.refine_evals / n_climb
                               + (static_cast<long long>(r) < config_.refine_evals % n_climb ? 1 : 0);
            double step = 0.25;
            int rejected = 0;
            const int dims = static_cast<int>(space.dims());
            for (long long e = 0; e < budget; ++e) {
                const int c = rng.uniform_int(0, dims - 1);
                const double span = space.hi[static_cast<std::size_t>(c)] - space.lo[static_cast<std::size_t>(c)];
                const double delta = step * span * (2.0 * rng.uniform01() - 1.0);
                const double old = s.genes[static_cast<std::size_t>(c)];
                s.genes[static_cast<std::size_t>(c)] =
                    std::clamp(old + delta, space.lo[static_cast<std::size_t>(c)], space.hi[static_cast<std::size_t>(c)]);
                const Objective obj = evaluate(s.genes, scratch);
                if (obj.l1 < s.obj.l1) {
                    s.obj = obj;
                    rejected = 0;
                } else {
                    s.genes[static_cast<std::size_t>(c)] = old;
                    if (++rejected >= 2 * dims) {
                        step = std::max(step * 0.5, 1e-3);
                        rejected = 0;
                    }
                }
            }
        });
        evaluations += config_.refine_evals;
    }

    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return starts[a].obj.l1 < starts[b].obj.l1;
    });

    FitResult result;
    result.evaluations = evaluations;
    result.seed = seed;
    const int keep = std::min<int>(config_.top_p, config_.n_starts);
    result.candidates.reserve(static_cast<std::size_t>(keep));
    for (int i = 0; i < keep; ++i) {
        const StartState& s = starts[order[static_cast<std::size_t>(i)]];
        FitCandidate cand;
        space.decode(s.genes, base, cand.spec);
        cand.l1 = s.obj.l1;
        cand.avg_rel = s.obj.avg_rel;
        cand.max_rel = s.obj.max_rel;
        result.candidates.push_back(std::move(cand));
    }
    return result;
}

FitResult fit(const IndicatorMatrix& reference,
              const PopulationSpec& base,
              const SearchConfig& config,
              std::uint64_t seed) {
    return MultiStartHillClimber(config).fit(reference, base, seed);
}

}  // namespace culsim
