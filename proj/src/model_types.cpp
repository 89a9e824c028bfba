#include "culsim/model_types.hpp"

#include <algorithm>
#include <stdexcept>

namespace culsim {

void require_initialized(const CulturalIdentity& identity, double epsilon) {
    identity.require_valid();
    constexpr double kWidthSlack = 1e-12;
    bool any_positive = false;
    for (const auto& s : identity.segments) {
        if (s.margin_low() < epsilon - kWidthSlack || s.margin_high() < epsilon - kWidthSlack) {
            throw std::invalid_argument("agent identity has a margin narrower than epsilon");
        }
        if (s.position > 0.0) any_positive = true;
    }
    if (!any_positive) {
        throw std::invalid_argument("agent identity needs at least one positive most acceptable position");
    }
}

Grid::Grid(int d) {
    if (d < 2) throw std::invalid_argument("grid needs at least 2 points");
    points_.resize(static_cast<std::size_t>(d));
    for (int p = 0; p < d; ++p) {
        points_[static_cast<std::size_t>(p)] = -1.0 + 2.0 * p / (d - 1);
    }
}

std::pair<int, int> Grid::interior_range(const AcceptanceSegment& seg) const {
    // Strict inequalities on both sides; a point exactly on a bound is not
    // inside the segment.
    const auto first = std::upper_bound(points_.begin(), points_.end(), seg.lower);
    const auto last = std::lower_bound(first, points_.end(), seg.upper);
    return {static_cast<int>(first - points_.begin()), static_cast<int>(last - points_.begin())};
}

}  // namespace culsim
