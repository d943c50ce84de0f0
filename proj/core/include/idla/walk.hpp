#pragma once

#include <cstdint>

#include "idla/rng.hpp"
#include "idla/site.hpp"

namespace idla {

/// One simple-random-walk particle bound to an RngStream.
struct WalkState {
    Site position;
    std::int64_t steps_taken = 0;
    RngStream* rng = nullptr;
};

/// Move to one of the 2d nearest neighbors with equal probability.
inline void step(int d, WalkState& w) {
    const auto r = w.rng->uniform_below(std::uint64_t(2 * d));
    const int axis = int(r >> 1);
    w.position[axis] += (r & 1) ? 1 : -1;
    ++w.steps_taken;
}

}  // namespace idla
