#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "culsim/population.hpp"

namespace culsim {

// A prototypical identity for one (group, kind) combination. Exclusive
// prototypes keep the own-group segment inside [0, 1] and every other
// segment inside [-1, 0]; inclusive prototypes keep the own-group segment
// inside [0, 1] and the other positions near zero with segments mostly on
// the positive side (midpoint >= 0).
struct Prototype {
    int group = 0;
    ProtoKind kind = ProtoKind::inclusive;
    CulturalIdentity identity;
};

// Largest position allowed toward non-own worldviews of an inclusive
// prototype ("close to zero").
inline constexpr double kInclusiveOtherPositionCap = 0.3;

void require_valid_prototype(const Prototype& proto,
                             const Worldviews& worldviews,
                             const ModelParams& params);

// Specification of a virtual population: N agents split into groups by
// `shares`, each group mixing x_inclusive of the inclusive prototype with
// 1 - x_inclusive of the exclusive one. Counts are rounded with the
// largest-remainder method. sigma > 0 adds uniform jitter to all segment
// values of every agent, repaired to keep identities valid.
// Prototypes are stored in canonical order: for each group, inclusive then
// exclusive.
struct PopulationSpec {
    int n = 1000;
    std::vector<double> shares;       // per group, sums to 1
    std::vector<double> x_inclusive;  // per group, in [0, 1]
    std::vector<Prototype> prototypes;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    Worldviews worldviews;
    ModelParams params;

    static std::size_t proto_index(int group, ProtoKind kind) {
        return static_cast<std::size_t>(group) * 2 + (kind == ProtoKind::exclusive ? 1 : 0);
    }
    void require_valid() const;
};

// Agent count per prototype (canonical order), two-level largest-remainder
// rounding: group counts from shares first, then the kind split within each
// group. Remainder ties go to the lowest index.
std::vector<long long> prototype_counts(int n,
                                        const std::vector<double>& shares,
                                        const std::vector<double>& x_inclusive);

Population build_population(const PopulationSpec& spec);

// Survey-style indicators: for every ordered group pair, the mean and the
// population standard deviation of the interpersonal attitudes over all
// agent pairs (i, j), i != j.
struct IndicatorMatrix {
    int n_groups = 0;
    std::vector<double> mean;    // row-major [observer][target]
    std::vector<double> stddev;

    double mean_at(int observer, int target) const {
        return mean.at(static_cast<std::size_t>(observer * n_groups + target));
    }
    double std_at(int observer, int target) const {
        return stddev.at(static_cast<std::size_t>(observer * n_groups + target));
    }
    int indicator_count() const { return 2 * n_groups * n_groups; }
};

IndicatorMatrix compute_indicators(const Population& population,
                                   const Grid& grid,
                                   const ModelParams& params,
                                   int threads = 0);

// Indicator matrix of the population expanded from prototypes with the
// given per-prototype agent counts (sigma = 0). Exactly the aggregation
// compute_indicators performs on the expanded population, evaluated from
// the distinct identities only.
IndicatorMatrix indicators_from_prototypes(const std::vector<Prototype>& prototypes,
                                           const std::vector<long long>& counts,
                                           const Grid& grid,
                                           const ModelParams& params);

struct Objective {
    double l1 = 0.0;       // sum of absolute indicator distances
    double avg_rel = 0.0;  // mean |diff| / max(|reference|, 0.1)
    double max_rel = 0.0;
};

Objective objective(const IndicatorMatrix& candidate, const IndicatorMatrix& reference);

struct SearchConfig {
    int n_starts = 4000;          // random initializations
    long long refine_evals = 16000;  // hill-climb evaluation budget
    int n_climb = 24;             // best starts kept for refinement
    int top_p = 120;              // candidates returned
    int fit_n = 60;               // population size used to evaluate candidates
    int threads = 0;
};

struct FitCandidate {
    PopulationSpec spec;
    double l1 = 0.0;
    double avg_rel = 0.0;
    double max_rel = 0.0;
};

struct FitResult {
    std::vector<FitCandidate> candidates;  // ascending by l1
    long long evaluations = 0;
    std::uint64_t seed = 0;
};

// Calibration interface. `base` supplies N, shares, sigma, worldviews and
// model parameters; the search chooses prototypes and x_inclusive.
// Candidates are evaluated without jitter on fit_n agents; the returned
// specs carry the base N for later expansion.
class Optimizer {
public:
    virtual ~Optimizer() = default;
    virtual FitResult fit(const IndicatorMatrix& reference,
                          const PopulationSpec& base,
                          std::uint64_t seed) const = 0;
};

// Default optimizer: multi-start random sampling followed by coordinate-wise
// stochastic hill climbing with shrinking steps. Deterministic given the
// seed, independent of thread count, and never worse with a larger budget.
class MultiStartHillClimber : public Optimizer {
public:
    explicit MultiStartHillClimber(SearchConfig config) : config_(config) {}
    FitResult fit(const IndicatorMatrix& reference,
                  const PopulationSpec& base,
                  std::uint64_t seed) const override;

private:
    SearchConfig config_;
};

FitResult fit(const IndicatorMatrix& reference,
              const PopulationSpec& base,
              const SearchConfig& config,
              std::uint64_t seed);

}  // namespace culsim
