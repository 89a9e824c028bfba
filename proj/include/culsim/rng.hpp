#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace culsim {

// All randomness in a run flows from one master seed through named,
// independently seeded streams, so results do not depend on evaluation
// order or thread count.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index);

class RngStream {
public:
    RngStream(std::uint64_t master, std::string_view stream, std::uint64_t index)
        : engine_(derive_seed(master, stream, index)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1). Hand-rolled from the top 53 bits so draws are
    // identical across standard library implementations.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(engine_() % span);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace culsim
