#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "idla/lattice.hpp"
#include "idla/rng.hpp"
#include "idla/site.hpp"

namespace idla {

/// Occupied set A(t) with per-site arrival times and the RNG stream
/// that grows it.
///
/// Occupancy lives in a bitmap over a symmetric cube that regrows
/// geometrically; membership and arrival lookups are O(1).  The cluster
/// additionally tracks, per integer radius bucket b = ceil|x|, how many
/// sites are occupied, which yields the largest fully-occupied ball
/// radius in O(1) -- the quantity the jump-kernel fast path needs.
class Cluster {
public:
    Cluster(const LatticeGeometry& geom, RngStream rng);

    const LatticeGeometry& geometry() const { return geom_; }
    const BoxIndex& box() const { return box_; }
    std::int64_t count() const { return count_; }

    RngStream& rng() { return rng_; }
    const RngStream& rng() const { return rng_; }

    bool occupied(const Site& x) const {
        return box_.contains(x) && test_bit(box_.flat(x));
    }
    bool occupied_flat(std::int64_t idx) const { return test_bit(idx); }

    /// First-occupation time of an occupied site; throws on others.
    std::int64_t arrival(const Site& x) const;

    /// Largest integer r >= 0 with B_r completely occupied; -1 while
    /// the origin is empty.
    int inner_radius() const { return inner_radius_; }

    /// max over occupied x of ceil|x| (0 for the empty cluster).
    int max_radius_bucket() const { return max_bucket_; }

    /// Occupy x at time t.  May regrow the bounding box; any cached
    /// flat indices are invalidated when that happens (watch epoch()).
    void add(const Site& x, std::int64_t t);

    /// Incremented every box regrow.
    std::uint64_t epoch() const { return epoch_; }

    /// Occupied sites in lexicographic order.
    template <class F>
    void for_each_occupied(F&& f) const {
        for (std::int64_t i = 0; i < box_.size(); ++i)
            if (test_bit(i)) f(box_.site(i), std::int64_t(arrival_[std::size_t(i)]));
    }

    bool operator==(const Cluster& other) const;

private:
    friend Cluster load_snapshot(const std::string&);

    bool test_bit(std::int64_t idx) const {
        return (bits_[std::size_t(idx >> 6)] >> (idx & 63)) & 1ULL;
    }
    void set_bit(std::int64_t idx) {
        bits_[std::size_t(idx >> 6)] |= 1ULL << (idx & 63);
    }
    void regrow(int new_half_width);
    void rebuild_radial_bookkeeping();

    LatticeGeometry geom_;
    RngStream rng_;
    BoxIndex box_;
    std::vector<std::uint64_t> bits_;
    std::vector<std::uint32_t> arrival_;  // 0 = unoccupied
    std::int64_t count_ = 0;
    std::uint64_t epoch_ = 0;

    std::vector<std::int64_t> bucket_total_;  // valid for b <= half_width
    std::vector<std::int64_t> bucket_occ_;
    int inner_radius_ = -1;
    int max_bucket_ = 0;
};

/// |B_b| - |B_{b-1}| for b = 0..W, shared across clusters (pure
/// geometry).  Thread-safe.
const std::vector<std::int64_t>& radius_bucket_totals(int d, int half_width);

/// The stopped multiset cluster: settled interior sites, stopped
/// particles accumulated on the absorbing shell, particles absorbed at
/// y, and (while a walk is in flight) the active particle.
struct StoppedCluster {
    Cluster inner;
    std::map<Site, std::int64_t> boundary_multiset;
    std::int64_t absorbed_at_y = 0;
    Site y;
    int k = 0;
    double s = 0.0;  // |y|
    std::optional<Site> active;
    std::int64_t launched = 0;
    std::int64_t steps_total = 0;

    std::int64_t boundary_mass() const {
        std::int64_t m = 0;
        for (const auto& [site, mult] : boundary_multiset) m += mult;
        return m;
    }
    /// inner + boundary + absorbed (+ active), the conservation check.
    std::int64_t total_mass() const {
        return inner.count() + boundary_mass() + absorbed_at_y + (active ? 1 : 0);
    }
};

}  // namespace idla
