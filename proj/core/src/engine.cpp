#include "idla/engine.hpp"

#include <algorithm>

namespace idla {

namespace {

struct KernelEntry {
    int h;
    std::int64_t h2;
    const JumpKernel* kernel;
};

std::vector<KernelEntry> make_ladder(int d, const std::vector<JumpKernel>* kernels) {
    std::vector<KernelEntry> ladder;
    if (!kernels) return ladder;
    for (const auto& k : *kernels) {
        if (k.dim() != d) throw ContractError("grow: kernel dimension mismatch");
        ladder.push_back({k.radius(), std::int64_t(k.radius()) * k.radius(), &k});
    }
    std::sort(ladder.begin(), ladder.end(),
              [](const KernelEntry& a, const KernelEntry& b) { return a.h > b.h; });
    return ladder;
}

Site walk_to_settlement(const Cluster& c, RngStream& rng,
                        const std::vector<KernelEntry>& ladder) {
    const int d = c.geometry().dim();
    Site pos{};
    std::int64_t norm2 = 0;
    std::int64_t idx = c.box().flat(pos);  // stays valid: the box only regrows on settle

    while (true) {
        bool jumped = false;
        const std::int64_t rin = c.inner_radius();
        for (const auto& entry : ladder) {
            if (rin < entry.h) continue;
            const std::int64_t reach = rin - entry.h;
            if (norm2 > reach * reach) continue;
            // B_h(pos) lies inside the fully occupied ball B_rin
            pos = pos + entry.kernel->sample(rng);
            norm2 = pos.norm2();
            idx = c.box().flat(pos);
            jumped = true;
            break;
        }
        if (!jumped) {
            const auto r = rng.uniform_below(std::uint64_t(2 * d));
            const int axis = int(r >> 1);
            if (r & 1) {
                norm2 += 2 * std::int64_t(pos[axis]) + 1;
                ++pos[axis];
                idx += c.box().stride(axis);
            } else {
                norm2 += 1 - 2 * std::int64_t(pos[axis]);
                --pos[axis];
                idx -= c.box().stride(axis);
            }
        }
        if (!c.occupied_flat(idx)) return pos;
    }
}

}  // namespace

Site sample_settlement(const Cluster& c, RngStream& rng,
                       const std::vector<JumpKernel>* kernels) {
    if (!c.occupied(Site{}))
        throw ContractError("sample_settlement: the origin must be occupied");
    return walk_to_settlement(c, rng, make_ladder(c.geometry().dim(), kernels));
}

Cluster grow(const LatticeGeometry& geom, std::int64_t particles, RngStream rng,
             const std::vector<JumpKernel>* kernels) {
    Cluster c(geom, rng);
    grow_more(c, particles, kernels);
    return c;
}

void grow_more(Cluster& c, std::int64_t additional, const std::vector<JumpKernel>* kernels) {
    if (additional < 0) throw ContractError("grow_more: negative particle count");
    const auto ladder = make_ladder(c.geometry().dim(), kernels);

    const std::int64_t target = c.count() + additional;
    for (std::int64_t t = c.count() + 1; t <= target; ++t) {
        if (!c.occupied(Site{})) {
            c.add(Site{}, t);
            continue;
        }
        const Site pos = walk_to_settlement(c, c.rng(), ladder);
        c.add(pos, t);
        if (pos.norm2() > t * t)
            throw SolverError("grow_more: settlement outside B_t, engine invariant broken");
    }
}

}  // namespace idla
