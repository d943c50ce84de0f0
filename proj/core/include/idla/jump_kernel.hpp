#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "idla/rng.hpp"
#include "idla/site.hpp"
#include "idla/walk.hpp"

namespace idla {

/// Exact exit distribution of a simple random walk started at the
/// center of the discrete ball B_h: the probability of first leaving
/// the ball at each exterior boundary offset.  Storage is collapsed to
/// one entry per symmetry orbit; all members of an orbit carry the same
/// probability, so sampling draws an orbit from the cumulative table
/// and then applies a uniformly random signed permutation to the
/// representative.
class JumpKernel {
public:
    struct Orbit {
        Site rep;            // canonical representative (abs coords, descending)
        std::int32_t size = 0;
        double member_prob = 0.0;  // probability of each individual offset
    };

    JumpKernel() = default;
    JumpKernel(int d, int h, std::vector<Orbit> orbits);

    int dim() const { return d_; }
    int radius() const { return h_; }
    const std::vector<Orbit>& orbits() const { return orbits_; }

    /// Draw one exit offset with the exact exit law.
    Site sample(RngStream& rng) const;

    /// Flat per-offset view (offset, probability), lexicographic order.
    std::vector<std::pair<Site, double>> expanded() const;

private:
    int d_ = 0;
    int h_ = 0;
    std::vector<Orbit> orbits_;
    std::vector<double> cdf_;  // over orbits, total probability
};

/// Solve the absorbing chain on B_h to residual < 1e-12 and collapse to
/// symmetry orbits.  Throws ResourceError when B_h would blow the
/// memory budget.
JumpKernel build_jump_kernel(int d, int h);

/// The standard kernel ladder: powers of two up to `cap`.
std::vector<JumpKernel> build_kernel_ladder(int d, int cap);

/// Versioned binary cache (magic "IDLK").
void save_kernel(const JumpKernel& k, const std::string& path);
JumpKernel load_kernel(const std::string& path);

using OccupancyQuery = std::function<bool(const Site&)>;

/// One walk move that is exact in law: when some kernel ball around the
/// walker is fully occupied, jump straight to an exit offset of the
/// largest such kernel; otherwise take a plain step.  The law of the
/// walk's first exit from the occupied set is that of the unaccelerated
/// walk.
void accelerated_step(int d, WalkState& w, const OccupancyQuery& occupied,
                      const std::vector<JumpKernel>& kernels);

}  // namespace idla
