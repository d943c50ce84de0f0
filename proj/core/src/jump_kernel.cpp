#include "idla/jump_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "idla/container.hpp"
#include "idla/lattice.hpp"
#include "idla/symmetry.hpp"

namespace idla {

JumpKernel::JumpKernel(int d, int h, std::vector<Orbit> orbits)
    : d_(d), h_(h), orbits_(std::move(orbits)) {
    cdf_.reserve(orbits_.size());
    double acc = 0.0;
    for (const auto& o : orbits_) {
        acc += o.member_prob * o.size;
        cdf_.push_back(acc);
    }
    if (!cdf_.empty()) cdf_.back() = 1.0;
}

Site JumpKernel::sample(RngStream& rng) const {
    const double u = rng.next_double();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto oi = std::size_t(std::min<std::ptrdiff_t>(it - cdf_.begin(), std::ptrdiff_t(cdf_.size()) - 1));
    Site x = orbits_[oi].rep;

    // A uniform group element maps the representative to a uniform
    // orbit member (each member is hit |stabilizer| times).
    for (int i = d_ - 1; i > 0; --i) {
        const int j = int(rng.uniform_below(std::uint64_t(i) + 1));
        std::swap(x.c[std::size_t(i)], x.c[std::size_t(j)]);
    }
    const std::uint64_t signs = rng.next_u64();
    for (int i = 0; i < d_; ++i)
        if (signs & (1ULL << i)) x[i] = -x[i];
    return x;
}

std::vector<std::pair<Site, double>> JumpKernel::expanded() const {
    std::vector<std::pair<Site, double>> out;
    for (const auto& o : orbits_)
        for (const auto& member : symmetry::orbit(d_, o.rep))
            out.emplace_back(member, o.member_prob);
    std::sort(out.begin(), out.end());
    return out;
}

JumpKernel build_jump_kernel(int d, int h) {
    if (h < 1) throw ContractError("build_jump_kernel: h >= 1 required");
    check_box_budget(d, h + 1, 8 + 8 + 4, std::int64_t(2) << 30);

    const BoxIndex box(d, h + 1);
    const double r2 = double(h) * h + Ball::kTie;

    // interior = B_h; flag array doubles as interior test
    std::vector<std::int64_t> interior_idx;
    std::vector<std::uint8_t> is_interior(std::size_t(box.size()), 0);
    for (std::int64_t i = 0; i < box.size(); ++i) {
        if (double(box.site(i).norm2()) <= r2) {
            is_interior[std::size_t(i)] = 1;
            interior_idx.push_back(i);
        }
    }

    // Expected visits v(x) of the walk from 0 before leaving B_h:
    //   v = delta_0 + Q^T v
    // solved by Gauss-Seidel sweeps to residual < 1e-12.  The exit
    // probability at an exterior site z is then sum_{x ~ z} v(x)/2d.
    std::vector<double> visits(std::size_t(box.size()), 0.0);
    const std::int64_t origin = box.flat(Site{});
    const double inv_deg = 1.0 / (2 * d);

    auto neighbor_sum = [&](std::int64_t i) {
        double s = 0.0;
        for (int axis = 0; axis < d; ++axis) {
            const std::int64_t st = box.stride(axis);
            if (is_interior[std::size_t(i - st)]) s += visits[std::size_t(i - st)];
            if (is_interior[std::size_t(i + st)]) s += visits[std::size_t(i + st)];
        }
        return s;
    };

    // Gauss-Seidel until the per-sweep delta hits the floating-point
    // floor, then verify the true equation residual.
    double delta = 1.0;
    for (int sweep = 0; sweep < 500000 && delta > 1e-15; ++sweep) {
        delta = 0.0;
        for (const std::int64_t i : interior_idx) {
            const double updated = (i == origin ? 1.0 : 0.0) + neighbor_sum(i) * inv_deg;
            delta = std::max(delta, std::abs(updated - visits[std::size_t(i)]));
            visits[std::size_t(i)] = updated;
        }
    }
    double residual = 0.0;
    for (const std::int64_t i : interior_idx) {
        const double rhs = (i == origin ? 1.0 : 0.0) + neighbor_sum(i) * inv_deg;
        residual = std::max(residual, std::abs(rhs - visits[std::size_t(i)]));
    }
    if (residual > 1e-12) throw SolverError("build_jump_kernel: residual " + std::to_string(residual));

    // exit mass per exterior neighbor site, collapsed by orbit
    std::map<Site, std::pair<double, std::int64_t>> orbit_acc;  // rep -> (mass, count)
    for (const std::int64_t i : interior_idx) {
        const Site x = box.site(i);
        for (int axis = 0; axis < d; ++axis) {
            for (int dir = -1; dir <= 1; dir += 2) {
                Site z = x;
                z[axis] += dir;
                if (double(z.norm2()) <= r2) continue;
                auto& acc = orbit_acc[symmetry::canonical(d, z)];
                acc.first += visits[std::size_t(i)] * inv_deg;
                acc.second = 0;  // size filled below
            }
        }
    }

    std::vector<JumpKernel::Orbit> orbits;
    double total = 0.0;
    for (auto& [rep, acc] : orbit_acc) {
        const auto members = symmetry::orbit(d, rep);
        JumpKernel::Orbit o;
        o.rep = rep;
        o.size = std::int32_t(members.size());
        o.member_prob = acc.first / double(members.size());
        total += acc.first;
        orbits.push_back(o);
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw SolverError("build_jump_kernel: exit mass " + std::to_string(total));
    for (auto& o : orbits) o.member_prob /= total;  // exact unit mass for the sampler

    return JumpKernel(d, h, std::move(orbits));
}

std::vector<JumpKernel> build_kernel_ladder(int d, int cap) {
    std::vector<JumpKernel> out;
    for (int h = 2; h <= cap; h *= 2) out.push_back(build_jump_kernel(d, h));
    return out;
}

void save_kernel(const JumpKernel& k, const std::string& path) {
    BinaryWriter w;
    w.magic("IDLK");
    w.u16(1);
    w.u8(std::uint8_t(k.dim()));
    w.u8(0);
    w.u32(std::uint32_t(k.radius()));
    w.u32(std::uint32_t(k.orbits().size()));
    for (const auto& o : k.orbits()) {
        for (int i = 0; i < k.dim(); ++i) w.i32(o.rep[i]);
        w.u32(std::uint32_t(o.size));
    }
    for (const auto& o : k.orbits()) w.f64(o.member_prob);
    w.finish_to_file(path);
}

JumpKernel load_kernel(const std::string& path) {
    BinaryReader r(path);
    r.expect_magic("IDLK");
    if (r.u16() != 1) throw CorruptSnapshotError(path + ": unsupported kernel version");
    const int d = r.u8();
    r.u8();
    const int h = int(r.u32());
    const auto n = r.u32();
    std::vector<JumpKernel::Orbit> orbits(n);
    for (auto& o : orbits) {
        for (int i = 0; i < d; ++i) o.rep[i] = r.i32();
        o.size = std::int32_t(r.u32());
    }
    for (auto& o : orbits) o.member_prob = r.f64();
    return JumpKernel(d, h, std::move(orbits));
}

void accelerated_step(int d, WalkState& w, const OccupancyQuery& occupied,
                      const std::vector<JumpKernel>& kernels) {
    std::vector<const JumpKernel*> by_radius;
    by_radius.reserve(kernels.size());
    for (const auto& k : kernels) by_radius.push_back(&k);
    std::sort(by_radius.begin(), by_radius.end(),
              [](const JumpKernel* a, const JumpKernel* b) { return a->radius() > b->radius(); });

    for (const JumpKernel* k : by_radius) {
        bool full = true;
        for (const auto& offset : discrete_ball(d, Site{}, double(k->radius()))) {
            if (!occupied(w.position + offset)) {
                full = false;
                break;
            }
        }
        if (full) {
            w.position = w.position + k->sample(*w.rng);
            ++w.steps_taken;
            return;
        }
    }
    step(d, w);
}

}  // namespace idla
