#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace culsim {

// Thrown when a target acceptance segment contains no grid point strictly
// inside its open interval, i.e. the segment is narrower than the grid
// resolution and cannot be perceived by other agents.
class DegenerateTargetSegment : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WorldviewId {
    int index = 0;
    std::string label;
};

// The set of cultural worldviews available in the environment. The defaults
// mirror the three groups used throughout the artifact: Muslim, Christian,
// areligious.
struct Worldviews {
    std::vector<std::string> labels = {"M", "C", "A"};

    int size() const { return static_cast<int>(labels.size()); }
    const std::string& label(int index) const { return labels.at(static_cast<std::size_t>(index)); }
    WorldviewId id(int index) const { return WorldviewId{index, label(index)}; }
    int index_of(std::string_view lbl) const {
        for (int i = 0; i < size(); ++i) {
            if (labels[static_cast<std::size_t>(i)] == lbl) return i;
        }
        return -1;
    }
    bool operator==(const Worldviews&) const = default;
};

// One worldview's latitude of acceptance: the most acceptable position plus
// the lower/upper bounds of the acceptance segment. Invariant:
// -1 <= lower <= position <= upper <= +1.
struct AcceptanceSegment {
    double position = 0.0;
    double lower = 0.0;
    double upper = 0.0;

    double margin_low() const { return position - lower; }
    double margin_high() const { return upper - position; }

    bool valid() const {
        return lower >= -1.0 && lower <= position && position <= upper && upper <= 1.0;
    }
    void require_valid() const {
        if (!valid()) {
            throw std::invalid_argument("invalid acceptance segment: requires -1 <= lower <= position <= upper <= 1");
        }
    }
    bool operator==(const AcceptanceSegment&) const = default;
};

// An agent's cultural identity: one acceptance segment per worldview,
// index-aligned with a Worldviews set.
struct CulturalIdentity {
    std::vector<AcceptanceSegment> segments;

    int size() const { return static_cast<int>(segments.size()); }
    const AcceptanceSegment& segment(int worldview) const {
        return segments.at(static_cast<std::size_t>(worldview));
    }
    void require_valid() const {
        if (segments.empty()) throw std::invalid_argument("cultural identity has no segments");
        for (const auto& s : segments) s.require_valid();
    }
    bool operator==(const CulturalIdentity&) const = default;
};

// Checks the extra constraints that hold for initialized (non-terrorist)
// agents: both margins at least epsilon wide and at least one positive
// most acceptable position. The width check allows 1e-12 of floating-point
// slack accumulated by clamping.
void require_initialized(const CulturalIdentity& identity, double epsilon);

// Model parameters. alpha scales the threat reaction, epsilon is the
// smallest attainable margin width, d the number of grid points, and
// eq2_normalizer the leading factor of the segment-attitude formula
// (1 keeps an agent's self-attitude at 1; 2 is the literal published
// factor). threat_all_worldviews extends the margin contraction from the
// aggressor's main worldview to all worldviews; off by default.
struct ModelParams {
    double alpha = 0.5;
    double epsilon = 0.05;
    int d = 400;
    double eq2_normalizer = 1.0;
    bool threat_all_worldviews = false;

    void require_valid() const {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha out of (0,1]");
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon out of (0,1)");
        if (d < 2) throw std::invalid_argument("d must be >= 2");
        if (!(eq2_normalizer > 0.0)) throw std::invalid_argument("eq2_normalizer must be > 0");
    }
    bool operator==(const ModelParams&) const = default;
};

// Regular discretization of the attitude axis: d points from -1 to +1
// inclusive, uniform spacing 2/(d-1).
class Grid {
public:
    explicit Grid(int d);

    int d() const { return static_cast<int>(points_.size()); }
    const std::vector<double>& points() const { return points_; }

    // Index range [first, last) of the grid points strictly inside the open
    // interval (lower, upper) of the segment. Empty range means the segment
    // is degenerate at this resolution.
    std::pair<int, int> interior_range(const AcceptanceSegment& seg) const;

private:
    std::vector<double> points_;
};

}  // namespace culsim
