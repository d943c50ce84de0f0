#include "idla/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "idla/stats.hpp"

namespace idla {

namespace {

// interior mask + parity update loops (same scheme as compute_green,
// but gated on the ball-shaped domain)
struct SolveGrid {
    BoxIndex box;
    std::vector<std::uint8_t> interior;
    std::vector<std::int64_t> interior_by_parity[2];
};

SolveGrid make_grid(int d, const Site& y, double outer_r) {
    SolveGrid grid;
    const int W = int(std::floor(outer_r)) + 2;
    check_box_budget(d, W, 8 + 1 + 8);
    grid.box = BoxIndex(d, W);
    grid.interior.assign(std::size_t(grid.box.size()), 0);
    const double r2 = outer_r * outer_r + Ball::kTie;
    for (std::int64_t i = 0; i < grid.box.size(); ++i) {
        const Site x = grid.box.site(i);
        if (double(x.norm2()) > r2 || x == y) continue;
        grid.interior[std::size_t(i)] = 1;
        int parity = 0;
        for (int j = 0; j < d; ++j) parity += x[j];
        grid.interior_by_parity[((parity % 2) + 2) % 2].push_back(i);
    }
    return grid;
}

}  // namespace

HarmonicField solve_P(int d, const Site& y, int k) {
    LatticeGeometry geom(d);
    if (y == Site{}) throw ContractError("solve_P: y must differ from the origin");
    if (k < 1) throw ContractError("solve_P: k >= 1 required");

    HarmonicField out;
    out.d = d;
    out.domain = {y, y.norm(), k};
    const double outer_r = out.domain.outer_radius();

    SolveGrid grid = make_grid(d, y, outer_r);
    out.P = GridFunction(d, grid.box.half_width());
    GridFunction& P = out.P;

    P.set(y, 1.0);
    for (int parity = 0; parity < 2; ++parity)
        for (const std::int64_t i : grid.interior_by_parity[parity]) P.raw_define(i);
    // absorbing sites: outside B_{s+k}, adjacent to the interior
    for (int parity = 0; parity < 2; ++parity) {
        for (const std::int64_t i : grid.interior_by_parity[parity]) {
            for (int axis = 0; axis < d; ++axis) {
                for (const std::int64_t j : {i - grid.box.stride(axis), i + grid.box.stride(axis)}) {
                    if (!grid.interior[std::size_t(j)] && grid.box.site(j) != y)
                        P.raw_define(j);  // value 0
                }
            }
        }
    }

    const double inv_deg = 1.0 / (2 * d);
    const double omega_sor = 2.0 / (1.0 + std::sin(M_PI / (2.0 * outer_r + 1.0)));
    auto neighbor_mean = [&](std::int64_t i) {
        double s = 0.0;
        for (int axis = 0; axis < d; ++axis)
            s += P.raw(i - grid.box.stride(axis)) + P.raw(i + grid.box.stride(axis));
        return s * inv_deg;
    };

    const int max_sweeps = 400 * int(outer_r) + 20000;
    double residual = 1.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (int parity = 0; parity < 2; ++parity)
            for (const std::int64_t i : grid.interior_by_parity[parity])
                P.raw(i) += omega_sor * (neighbor_mean(i) - P.raw(i));
        if (sweep % 16 == 15 || sweep == max_sweeps - 1) {
            residual = 0.0;
            for (int parity = 0; parity < 2; ++parity)
                for (const std::int64_t i : grid.interior_by_parity[parity])
                    residual = std::max(residual, std::abs(neighbor_mean(i) - P.raw(i)));
            if (residual < 1e-12) break;
        }
    }
    out.residual = residual;
    if (residual > 1e-10)
        throw SolverError("solve_P: residual " + std::to_string(residual) + " after sweep cap");

    out.p0 = P.at(Site{});
    return out;
}

UpperAuditReport audit_upper(const HarmonicField& hf) {
    const int d = hf.d;
    const double s = hf.domain.s;
    const int k = hf.domain.k;
    const Site y = hf.domain.y;
    const BoxIndex& box = hf.P.box();
    const double r2 = hf.domain.outer_radius() * hf.domain.outer_radius() + Ball::kTie;

    UpperAuditReport rpt;
    const int max_bucket = int(std::ceil(hf.domain.outer_radius())) + 1;
    std::vector<double> bucket_max(std::size_t(max_bucket) + 1, 0.0);

    for (std::int64_t i = 0; i < box.size(); ++i) {
        if (!hf.P.raw_defined(i)) continue;
        const Site x = box.site(i);
        if (x == y || double(x.norm2()) > r2) continue;
        const double p = hf.P.raw(i);
        const double dist = (x - y).norm();

        rpt.C_a = std::max(rpt.C_a, p * (1.0 + std::pow(dist, d - 2.0)));
        const double depth = s + k + 1.0 - x.norm();
        if (dist >= 0.5 * k)
            rpt.C_b_stated = std::max(rpt.C_b_stated, p * std::pow(dist, double(d)) / (k * depth));
        if (dist >= 2.0 * k)
            rpt.C_b_wide = std::max(rpt.C_b_wide, p * std::pow(dist, double(d)) / (k * depth));

        const int b = ceil_norm(x);
        bucket_max[std::size_t(b)] = std::max(bucket_max[std::size_t(b)], p);
    }

    // (c): prefix max over balls, r < s - 2k
    double running = 0.0;
    std::optional<double> c_c;
    for (int r = 0; double(r) < s - 2.0 * k; ++r) {
        if (std::size_t(r) >= bucket_max.size()) break;
        running = std::max(running, bucket_max[std::size_t(r)]);
        const double value = running * std::pow(s - r - k, d - 1.0) / k;
        c_c = std::max(c_c.value_or(0.0), value);
    }
    rpt.C_c = c_c;
    return rpt;
}

LowerAuditReport audit_lower(const HarmonicField& hf, int m) {
    const int d = hf.d;
    const double s = hf.domain.s;
    const int k = hf.domain.k;

    LowerAuditReport rpt;
    rpt.m = m;
    rpt.c_a = hf.p0 * std::pow(s, d - 1.0) / k;

    if (m >= 1) {
        if (k != 1)
            throw ContractError("audit_lower: the ball lower bound is defined for k = 1 only");
        if (4 * m >= s)
            throw ContractError("audit_lower: 4m < s required so B(z,m) sits inside the domain");
        // real-valued center z = (1 - 2m/s) y
        const double scale = 1.0 - 2.0 * m / s;
        std::array<double, kMaxDim> z{};
        for (int i = 0; i < d; ++i) z[std::size_t(i)] = scale * hf.domain.y[i];

        double min_p = 1.0;
        bool found = false;
        const BoxIndex& box = hf.P.box();
        for (std::int64_t i = 0; i < box.size(); ++i) {
            if (!hf.P.raw_defined(i)) continue;
            const Site x = box.site(i);
            double dist2 = 0.0;
            for (int j = 0; j < d; ++j) {
                const double dx = x[j] - z[std::size_t(j)];
                dist2 += dx * dx;
            }
            if (dist2 > double(m) * m + Ball::kTie) continue;
            min_p = std::min(min_p, hf.P.raw(i));
            found = true;
        }
        if (!found) throw ContractError("audit_lower: B(z,m) contains no lattice site");
        rpt.c_b = min_p * std::pow(double(m), d - 1.0);
    }
    return rpt;
}

ShellSumReport shell_sums(const HarmonicField& hf) {
    const double s = hf.domain.s;
    const int k = hf.domain.k;
    const double outer = hf.domain.outer_radius();
    const BoxIndex& box = hf.P.box();
    const double r2 = outer * outer + Ball::kTie;

    // bucket b holds sites with b-1 < |x| <= b, i.e. the shell
    // B_b \ B_{b-1}; y is included with P(y) = 1.
    const int max_bucket = int(std::ceil(outer)) + 1;
    std::vector<stats::KahanSum> bucket_sum(std::size_t(max_bucket) + 1);
    std::vector<std::int64_t> bucket_count(std::size_t(max_bucket) + 1, 0);
    for (std::int64_t i = 0; i < box.size(); ++i) {
        if (!hf.P.raw_defined(i)) continue;
        const Site x = box.site(i);
        if (double(x.norm2()) > r2) continue;  // absorbing shell carries P = 0
        const int b = ceil_norm(x);
        bucket_sum[std::size_t(b)].add(hf.P.raw(i));
        ++bucket_count[std::size_t(b)];
    }

    ShellSumReport rpt;
    // (a) shells B_{r+1} \ B_r = bucket r+1, for r = 0..floor(s+k)
    for (int r = 0; r <= int(std::floor(outer)); ++r) {
        if (std::size_t(r + 1) >= bucket_sum.size()) break;
        rpt.shell_over_k = std::max(rpt.shell_over_k, bucket_sum[std::size_t(r + 1)].value() / k);
    }
    // (b) centered ball sums up to r <= s
    double prefix_sum = bucket_sum[0].value();
    std::int64_t prefix_count = bucket_count[0];
    for (int r = 1; r <= int(std::floor(s + Ball::kTie)); ++r) {
        prefix_sum += bucket_sum[std::size_t(r)].value();
        prefix_count += bucket_count[std::size_t(r)];
        rpt.ball_over_k = std::max(rpt.ball_over_k,
                                   std::abs(prefix_sum - double(prefix_count) * hf.p0) / k);
    }
    // (c) the full ball B_{s+k}
    double full_sum = 0.0;
    std::int64_t full_count = 0;
    for (std::size_t b = 0; b < bucket_sum.size(); ++b) {
        full_sum += bucket_sum[b].value();
        full_count += bucket_count[b];
    }
    rpt.full_ball_over_k2 = std::abs(full_sum - double(full_count) * hf.p0) / (double(k) * k);
    return rpt;
}

}  // namespace idla
