#pragma once

#include <string>
#include <vector>

#include "idla/cluster.hpp"
#include "idla/jump_kernel.hpp"

namespace idla {

/// Grow an internal DLA cluster by launching `particles` walkers from
/// the origin; each settles on the first site it reaches outside the
/// current cluster.  With `kernels`, walkers deep inside the cluster
/// fast-forward by exact exit jumps; the settlement law is unchanged.
Cluster grow(const LatticeGeometry& geom, std::int64_t particles, RngStream rng,
             const std::vector<JumpKernel>* kernels = nullptr);

/// Continue growing an existing cluster (e.g. one restored from a
/// snapshot) by `additional` particles.  Resume is bit-exact: growing
/// T+T' in one go equals growing T, snapshotting, restoring and growing
/// T' -- provided the same kernel configuration is passed.
void grow_more(Cluster& c, std::int64_t additional,
               const std::vector<JumpKernel>* kernels = nullptr);

/// Settlement site of the next walker on a frozen cluster (the cluster
/// is not modified).  Same law and same stream consumption as one
/// grow_more step; the basis of the acceleration A/B checks.
Site sample_settlement(const Cluster& c, RngStream& rng,
                       const std::vector<JumpKernel>* kernels = nullptr);

namespace detail {

/// Core loop of the stopped process; `obs(from, to)` fires on every
/// lattice step of the active particle, including the absorbing one.
template <class Observer>
void grow_stopped_impl(StoppedCluster& sc, std::int64_t particles, Observer&& obs) {
    const LatticeGeometry& geom = sc.inner.geometry();
    const int d = geom.dim();
    const double outer_r2 = (sc.s + sc.k) * (sc.s + sc.k) + Ball::kTie;
    RngStream& rng = sc.inner.rng();

    for (std::int64_t n = 0; n < particles; ++n) {
        const std::int64_t t = sc.launched + 1;
        if (!sc.inner.occupied(Site{})) {
            sc.inner.add(Site{}, t);
            ++sc.launched;
            continue;
        }
        Site pos{};
        sc.active = pos;
        while (true) {
            const auto r = rng.uniform_below(std::uint64_t(2 * d));
            Site next = pos;
            next[int(r >> 1)] += (r & 1) ? 1 : -1;
            obs(pos, next);
            ++sc.steps_total;
            sc.active = next;
            if (next == sc.y) {
                ++sc.absorbed_at_y;
                break;
            }
            if (double(next.norm2()) > outer_r2) {
                ++sc.boundary_multiset[next];
                break;
            }
            if (!sc.inner.occupied(next)) {
                sc.inner.add(next, t);
                break;
            }
            pos = next;
        }
        sc.active.reset();
        ++sc.launched;
    }
}

}  // namespace detail

/// Stopped internal DLA: particles are absorbed at y or at the first
/// lattice site outside B_{s+k}, s = |y|; absorbed particles accumulate
/// as multiset mass.  Never accelerated.
template <class Observer>
StoppedCluster grow_stopped(const LatticeGeometry& geom, const Site& y, int k,
                            std::int64_t particles, RngStream rng, Observer&& obs) {
    if (y == Site{}) throw ContractError("grow_stopped: y must differ from the origin");
    if (k < 1) throw ContractError("grow_stopped: k >= 1 required");
    if (particles < 0) throw ContractError("grow_stopped: negative particle count");
    StoppedCluster sc{Cluster(geom, rng), {}, 0, y, k, y.norm(), {}, 0, 0};
    detail::grow_stopped_impl(sc, particles, obs);
    return sc;
}

inline StoppedCluster grow_stopped(const LatticeGeometry& geom, const Site& y, int k,
                                   std::int64_t particles, RngStream rng) {
    return grow_stopped(geom, y, k, particles, rng, [](const Site&, const Site&) {});
}

/// Binary snapshot (magic "IDLA"): occupancy bitmap, arrival times,
/// RNG stream state, CRC64 trailer.
void save_snapshot(const Cluster& c, const std::string& path);
Cluster load_snapshot(const std::string& path);

}  // namespace idla
