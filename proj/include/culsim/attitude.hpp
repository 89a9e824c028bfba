#pragma once

#include "culsim/model_types.hpp"

namespace culsim {

// Attitude of a segment holder about a single position on the axis.
// Returns 1 strictly inside the acceptance segment, 0 exactly at the
// bounds, and decreases toward -1 with the distance to the closest bound;
// the decrease is steeper the narrower the margin on the exited side.
// A zero-width margin on the exited side yields the limit value -1.
double attitude_to_position(const AcceptanceSegment& seg, double position);

// Attitude of an observer about a target acceptance segment: the mean of
// the observer's position attitudes over the grid points strictly inside
// the target segment, scaled by params.eq2_normalizer. Throws
// DegenerateTargetSegment when the target contains no interior grid point.
double attitude_to_segment(const AcceptanceSegment& observer,
                           const AcceptanceSegment& target,
                           const Grid& grid,
                           const ModelParams& params);

// Attitude of an observer about a whole cultural identity: the arithmetic
// mean of the per-worldview segment attitudes. Both identities must cover
// the same worldviews.
double attitude_to_identity(const CulturalIdentity& observer,
                            const CulturalIdentity& target,
                            const Grid& grid,
                            const ModelParams& params);

// The worldview with the highest most acceptable position; ties go to the
// lowest worldview index.
int group_of(const CulturalIdentity& identity);

// Grid-cached view of one observer. Precomputes prefix sums of the
// observer's position attitudes so that the attitude about any target
// segment reduces to one range sum. Matches the direct evaluation to
// floating-point accumulation error (~1e-13 at d = 400).
class ObserverTable {
public:
    ObserverTable(const CulturalIdentity& observer, const Grid& grid);

    int worldviews() const { return static_cast<int>(prefix_.size()); }

    double attitude_to_segment(int worldview,
                               const AcceptanceSegment& target,
                               const Grid& grid,
                               const ModelParams& params) const;

    // Range-sum variant for callers that precompute target interior ranges.
    double attitude_over_range(int worldview, int first, int last, const ModelParams& params) const;

    double attitude_to_identity(const CulturalIdentity& target,
                                const Grid& grid,
                                const ModelParams& params) const;

private:
    std::vector<std::vector<double>> prefix_;  // per worldview, d+1 entries
};

}  // namespace culsim
