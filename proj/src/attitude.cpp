#include "culsim/attitude.hpp"

#include <cmath>
#include <stdexcept>

namespace culsim {

double attitude_to_position(const AcceptanceSegment& seg, double position) {
    seg.require_valid();
    if (!(position >= -1.0 && position <= 1.0)) {
        throw std::invalid_argument("position out of [-1, 1]");
    }
    if (position > seg.lower && position < seg.upper) return 1.0;
    double y;
    if (position <= seg.lower) {
        const double width = seg.position - seg.lower;
        if (width <= 0.0) return -1.0;
        y = 1.0 + (position - seg.position) / width;
    } else {
        const double width = seg.upper - seg.position;
        if (width <= 0.0) return -1.0;
        y = 1.0 + (seg.position - position) / width;
    }
    // (e^y - 1) / (e^y + 1), written as tanh for numerical stability.
    return std::tanh(0.5 * y);
}

double attitude_to_segment(const AcceptanceSegment& observer,
                           const AcceptanceSegment& target,
                           const Grid& grid,
                           const ModelParams& params) {
    double num = 0.0;
    double den = 0.0;
    for (const double p : grid.points()) {
        const double wj = attitude_to_position(target, p);
        if (wj > 0.0) {
            num += attitude_to_position(observer, p) * wj;
            den += wj;
        }
    }
    if (den == 0.0) {
        throw DegenerateTargetSegment("target segment contains no interior grid point");
    }
    return params.eq2_normalizer * num / den;
}

double attitude_to_identity(const CulturalIdentity& observer,
                            const CulturalIdentity& target,
                            const Grid& grid,
                            const ModelParams& params) {
    if (observer.size() != target.size()) {
        throw std::invalid_argument("identities cover different worldview sets");
    }
    if (observer.size() == 0) throw std::invalid_argument("empty cultural identity");
    double sum = 0.0;
    for (int k = 0; k < observer.size(); ++k) {
        sum += attitude_to_segment(observer.segment(k), target.segment(k), grid, params);
    }
    return sum / observer.size();
}

int group_of(const CulturalIdentity& identity) {
    identity.require_valid();
    int best = 0;
    for (int k = 1; k < identity.size(); ++k) {
        if (identity.segment(k).position > identity.segment(best).position) best = k;
    }
    return best;
}

ObserverTable::ObserverTable(const CulturalIdentity& observer, const Grid& grid) {
    observer.require_valid();
    const auto& pts = grid.points();
    prefix_.resize(static_cast<std::size_t>(observer.size()));
    for (int k = 0; k < observer.size(); ++k) {
        auto& pre = prefix_[static_cast<std::size_t>(k)];
        pre.resize(pts.size() + 1);
        pre[0] = 0.0;
        const AcceptanceSegment& seg = observer.segment(k);
        for (std::size_t p = 0; p < pts.size(); ++p) {
            pre[p + 1] = pre[p] + attitude_to_position(seg, pts[p]);
        }
    }
}

double ObserverTable::attitude_over_range(int worldview, int first, int last,
                                          const ModelParams& params) const {
    if (first >= last) {
        throw DegenerateTargetSegment("target segment contains no interior grid point");
    }
    const auto& pre = prefix_.at(static_cast<std::size_t>(worldview));
    const double sum = pre[static_cast<std::size_t>(last)] - pre[static_cast<std::size_t>(first)];
    return params.eq2_normalizer * sum / (last - first);
}

double ObserverTable::attitude_to_segment(int worldview,
                                          const AcceptanceSegment& target,
                                          const Grid& grid,
                                          const ModelParams& params) const {
    const auto [first, last] = grid.interior_range(target);
    return attitude_over_range(worldview, first, last, params);
}

double ObserverTable::attitude_to_identity(const CulturalIdentity& target,
                                           const Grid& grid,
                                           const ModelParams& params) const {
    if (target.size() != worldviews()) {
        throw std::invalid_argument("identities cover different worldview sets");
    }
    double sum = 0.0;
    for (int k = 0; k < target.size(); ++k) {
        sum += attitude_to_segment(k, target.segment(k), grid, params);
    }
    return sum / target.size();
}

}  // namespace culsim
