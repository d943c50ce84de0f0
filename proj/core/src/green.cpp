#include "idla/green.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "idla/container.hpp"
#include "idla/stats.hpp"
#include "idla/symmetry.hpp"

namespace idla {

// ---------------------------------------------------------------------------
// GreenReference: g(x) = int_0^inf prod_j e^{-t/d} I_{x_j}(t/d) dt.
//
// The integrand is smooth and decays like t^{-d/2}; we integrate
// doubling panels [0,1], [1,2], ..., [T/2, T] with 32-point Gauss-
// Legendre and close with the analytic tail obtained from the uniform
// asymptotic series of e^{-z} I_n(z).
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kGaussOrder = 32;

// coefficients of e^{-z} I_n(z) ~ (2 pi z)^{-1/2} (1 + c1/z + c2/z^2 + c3/z^3)
void scaled_bessel_series(std::int64_t n, double coef[4]) {
    const double mu = 4.0 * double(n) * double(n);
    coef[0] = 1.0;
    coef[1] = -(mu - 1.0) / 8.0;
    coef[2] = (mu - 1.0) * (mu - 9.0) / 128.0;
    coef[3] = -(mu - 1.0) * (mu - 9.0) * (mu - 25.0) / 3072.0;
}

}  // namespace

GreenReference::GreenReference(int d, int n_max) : d_(d), n_max_(n_max) {
    LatticeGeometry geom(d);  // validates d
    if (n_max < 0) throw ContractError("GreenReference: n_max >= 0 required");

    // tail start: keeps the asymptotic series parameter mu/(8 z) small
    tail_t0_ = std::max(1.0e6, 50.0 * d * double(n_max) * double(n_max));

    gsl_integration_glfixed_table* gl = gsl_integration_glfixed_table_alloc(kGaussOrder);
    std::vector<double> nodes;
    double lo = 0.0, hi = 1.0;
    while (lo < tail_t0_) {
        for (std::size_t i = 0; i < kGaussOrder; ++i) {
            double t, w;
            gsl_integration_glfixed_point(lo, std::min(hi, tail_t0_), i, &t, &w, gl);
            nodes.push_back(t);
            weights_.push_back(w);
        }
        lo = hi;
        hi *= 2.0;
    }
    gsl_integration_glfixed_table_free(gl);

    // high orders at tiny arguments underflow; that is a hard zero for
    // our purposes, not an error
    static std::once_flag handler_once;
    std::call_once(handler_once, [] { gsl_set_error_handler_off(); });

    table_.resize(nodes.size() * std::size_t(n_max_ + 1));
    std::vector<double> scaled(std::size_t(n_max_) + 1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double z = nodes[i] / d_;
        if (gsl_sf_bessel_In_scaled_array(0, n_max_, z, scaled.data()) != GSL_SUCCESS) {
            for (int n = 0; n <= n_max_; ++n) {
                gsl_sf_result res;
                scaled[std::size_t(n)] =
                    gsl_sf_bessel_In_scaled_e(n, z, &res) == GSL_SUCCESS ? res.val : 0.0;
            }
        }
        std::copy(scaled.begin(), scaled.end(),
                  table_.begin() + std::ptrdiff_t(i * std::size_t(n_max_ + 1)));
    }
}

double GreenReference::operator()(const Site& x) const {
    std::array<std::size_t, kMaxDim> n{};
    for (int j = 0; j < d_; ++j) {
        n[std::size_t(j)] = std::size_t(std::abs(x[j]));
        if (int(n[std::size_t(j)]) > n_max_)
            throw ContractError("GreenReference: coordinate beyond table");
    }

    const std::size_t stride = std::size_t(n_max_ + 1);
    const std::size_t n_nodes = weights_.size();
    stats::KahanSum sum;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        double prod = weights_[i];
        const double* row = table_.data() + i * stride;
        for (int j = 0; j < d_; ++j) prod *= row[n[std::size_t(j)]];
        sum.add(prod);
    }

    // analytic tail: prod_j series in 1/z truncated at z^{-3}, z = t/d
    double prod_series[4] = {1.0, 0.0, 0.0, 0.0};
    for (int j = 0; j < d_; ++j) {
        double cj[4];
        scaled_bessel_series(std::int64_t(n[std::size_t(j)]), cj);
        double next[4] = {0.0, 0.0, 0.0, 0.0};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; a + b < 4; ++b) next[a + b] += prod_series[a] * cj[b];
        std::copy(next, next + 4, prod_series);
    }
    const double pref = std::pow(double(d_) / (2.0 * M_PI), 0.5 * d_);
    double tail = 0.0;
    double dk = 1.0;
    for (int k = 0; k < 4; ++k) {
        const double p = 0.5 * d_ + k;  // integrand power of 1/t
        tail += prod_series[k] * dk * std::pow(tail_t0_, 1.0 - p) / (p - 1.0);
        dk *= double(d_);
    }
    return sum.value() + pref * tail;
}

// ---------------------------------------------------------------------------
// compute_green
// ---------------------------------------------------------------------------

namespace {

/// Red-black SOR sweep machinery shared by green and harmonic solves.
/// Updates sites of one parity along the last axis with stride-2 inner
/// loops; the caller supplies the per-site update.
template <class Update>
void for_each_parity(const BoxIndex& box, int lo, int hi, int parity, Update&& f) {
    const int d = box.dim();
    const int W = box.half_width();
    Site x;
    for (int i = 0; i < d - 1; ++i) x[i] = lo;
    x[d - 1] = 0;
    while (true) {
        int coord_parity = 0;
        std::int64_t base = 0;
        for (int i = 0; i < d - 1; ++i) {
            coord_parity += x[i];
            base += std::int64_t(x[i] + W) * box.stride(i);
        }
        int first = lo + (((parity - coord_parity - lo) % 2 + 2) % 2);
        const std::int64_t stride_last = box.stride(d - 1);
        std::int64_t idx = base + std::int64_t(first + W) * stride_last;
        for (int xl = first; xl <= hi; xl += 2, idx += 2 * stride_last) f(idx);

        int axis = d - 2;
        while (axis >= 0 && x[axis] == hi) {
            x[axis] = lo;
            --axis;
        }
        if (axis < 0) break;
        ++x[axis];
    }
}

}  // namespace

GreenField compute_green(int d, int R) {
    LatticeGeometry geom(d);
    if (R < 4) throw ContractError("compute_green: R >= 4 required");

    GreenField out;
    out.d = d;
    out.R = R;
    out.a_d = geom.green_constant();
    out.g = GridFunction(d, R);

    GridFunction& g = out.g;
    const BoxIndex& box = g.box();

    // exact boundary values on the cube shell, asymptotic initial guess
    // in the interior
    GreenReference reference(d, R);
    for (std::int64_t i = 0; i < box.size(); ++i) {
        const Site x = box.site(i);
        int max_coord = 0;
        for (int j = 0; j < d; ++j) max_coord = std::max(max_coord, std::abs(x[j]));
        const double r = x.norm();
        if (max_coord == R)
            g.raw(i) = reference(x);
        else
            g.raw(i) = (r == 0.0) ? 1.5 : out.a_d * std::pow(r, 2.0 - d);
        g.raw_define(i);
    }

    const double inv_deg = 1.0 / (2 * d);
    const std::int64_t origin = box.flat(Site{});
    const double omega_sor = 2.0 / (1.0 + std::sin(M_PI / (2.0 * R + 1.0)));

    auto neighbor_mean = [&](std::int64_t i) {
        double s = 0.0;
        for (int axis = 0; axis < d; ++axis)
            s += g.raw(i - box.stride(axis)) + g.raw(i + box.stride(axis));
        return s * inv_deg;
    };

    const int max_sweeps = 200 * R + 20000;
    double residual = 1.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (int parity = 0; parity < 2; ++parity) {
            for_each_parity(box, -R + 1, R - 1, parity, [&](std::int64_t i) {
                const double rhs = neighbor_mean(i) + (i == origin ? 1.0 : 0.0);
                g.raw(i) += omega_sor * (rhs - g.raw(i));
            });
        }
        if (sweep % 16 == 15 || sweep == max_sweeps - 1) {
            residual = 0.0;
            for_each_parity(box, -R + 1, R - 1, 0, [&](std::int64_t i) {
                residual = std::max(residual, std::abs(neighbor_mean(i) + (i == origin ? 1.0 : 0.0) - g.raw(i)));
            });
            for_each_parity(box, -R + 1, R - 1, 1, [&](std::int64_t i) {
                residual = std::max(residual, std::abs(neighbor_mean(i) + (i == origin ? 1.0 : 0.0) - g.raw(i)));
            });
            if (residual < 1e-12) break;
        }
    }
    out.residual = residual;
    if (residual > 1e-10)
        throw SolverError("compute_green: residual " + std::to_string(residual) + " after sweep cap");

    // cross-validate a_d against the field on the annulus 10 <= |x| <= R/2
    out.a_fit = out.a_d;
    if (R >= 24) {
        stats::KahanSum acc;
        std::int64_t count = 0;
        for (std::int64_t i = 0; i < box.size(); ++i) {
            const Site x = box.site(i);
            const double r = x.norm();
            if (r < 10.0 || r > 0.5 * R) continue;
            acc.add(g.raw(i) * std::pow(r, d - 2.0));
            ++count;
        }
        out.a_fit = acc.value() / double(count);
        if (std::abs(out.a_fit / out.a_d - 1.0) > 0.02)
            throw SolverError("compute_green: a_d cross-validation failed, fit " +
                              std::to_string(out.a_fit) + " vs " + std::to_string(out.a_d));
    }
    return out;
}

double uchiyama_residual(const GreenField& gf, double r_min, double r_max) {
    if (!(r_min > 0.0) || r_min > r_max)
        throw ContractError("uchiyama_residual: need 0 < r_min <= r_max");
    if (r_max > 0.5 * gf.R)
        throw ContractError("uchiyama_residual: r_max beyond R/2 is contaminated by the box");

    const double lo2 = r_min * r_min - Ball::kTie;
    const double hi2 = r_max * r_max + Ball::kTie;
    double worst = -1.0;
    const BoxIndex& box = gf.g.box();
    for (std::int64_t i = 0; i < box.size(); ++i) {
        const Site x = box.site(i);
        const double n2 = double(x.norm2());
        if (n2 < lo2 || n2 > hi2 || n2 == 0.0) continue;
        const double r = std::sqrt(n2);
        const double err = std::abs(gf.g.raw(i) - gf.a_d * std::pow(r, 2.0 - gf.d));
        worst = std::max(worst, err * std::pow(r, double(gf.d)));
    }
    if (worst < 0.0) throw ContractError("uchiyama_residual: no lattice site in the annulus");
    return worst;
}

HarmonicMeasure harmonic_measure_levelset(const GreenField& gf, double alpha) {
    if (!(alpha > 0.0)) throw ContractError("harmonic_measure_levelset: alpha > 0 required");

    const BoxIndex& box = gf.g.box();
    const int d = gf.d;
    HarmonicMeasure out;
    out.alpha = alpha;

    // hypothesis: the level set boundary misses the lattice
    for (std::int64_t i = 0; i < box.size(); ++i) {
        if (std::abs(gf.g.raw(i) - alpha) < 1e-12)
            throw ContractError("harmonic_measure_levelset: alpha hits a lattice value of g");
    }
    if (gf.g.at(Site{}) <= alpha)
        throw ContractError("harmonic_measure_levelset: level set is empty");

    std::vector<std::pair<Site, Site>> raw_edges;
    for (std::int64_t i = 0; i < box.size(); ++i) {
        if (gf.g.raw(i) <= alpha) continue;
        const Site x = box.site(i);
        int max_coord = 0;
        for (int j = 0; j < d; ++j) max_coord = std::max(max_coord, std::abs(x[j]));
        if (max_coord >= gf.R)
            throw ContractError("harmonic_measure_levelset: level set touches the solved box");
        for (int axis = 0; axis < d; ++axis) {
            for (int dir = -1; dir <= 1; dir += 2) {
                Site nbr = x;
                nbr[axis] += dir;
                if (gf.g.at(nbr) < alpha) raw_edges.emplace_back(x, nbr);
            }
        }
    }

    // canonical orbit keys under the signed-permutation group
    std::vector<std::pair<Site, Site>> keys(raw_edges.size());
    for (std::size_t e = 0; e < raw_edges.size(); ++e) {
        std::pair<Site, Site> best = raw_edges[e];
        std::array<int, kMaxDim> perm{};
        for (int i = 0; i < d; ++i) perm[std::size_t(i)] = i;
        do {
            for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
                std::pair<Site, Site> img;
                for (int i = 0; i < d; ++i) {
                    const int sign = (mask & (1u << i)) ? -1 : 1;
                    img.first[i] = sign * raw_edges[e].first[perm[std::size_t(i)]];
                    img.second[i] = sign * raw_edges[e].second[perm[std::size_t(i)]];
                }
                best = std::min(best, img);
            }
        } while (std::next_permutation(perm.begin(), perm.begin() + d));
        keys[e] = best;
    }
    std::vector<std::pair<Site, Site>> distinct = keys;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    out.orbit_count = distinct.size();

    stats::KahanSum sum;
    out.boundary.reserve(raw_edges.size());
    for (std::size_t e = 0; e < raw_edges.size(); ++e) {
        const auto& [in, outside] = raw_edges[e];
        LevelSetBoundaryPoint bp;
        bp.inside = in;
        bp.outside = outside;
        const double gi = gf.g.at(in);
        const double go = gf.g.at(outside);
        bp.frac = (gi - alpha) / (gi - go);
        bp.p = (gi - go) / double(2 * d);
        bp.orbit = std::size_t(std::lower_bound(distinct.begin(), distinct.end(), keys[e]) -
                               distinct.begin());
        sum.add(bp.p);
        out.boundary.push_back(bp);
    }
    out.sum_p = sum.value();
    return out;
}

void save_green(const GreenField& gf, const std::string& path) {
    BinaryWriter w;
    w.magic("IDLG");
    w.u16(1);
    w.u8(std::uint8_t(gf.d));
    w.u8(0);
    w.i32(gf.R);
    w.f64(gf.a_d);
    w.f64(gf.a_fit);
    w.f64(gf.residual);
    for (std::int64_t i = 0; i < gf.g.box().size(); ++i) w.f64(gf.g.raw(i));
    w.finish_to_file(path);
}

GreenField load_green(const std::string& path) {
    BinaryReader r(path);
    r.expect_magic("IDLG");
    if (r.u16() != 1) throw CorruptSnapshotError(path + ": unsupported field version");
    GreenField out;
    out.d = r.u8();
    r.u8();
    out.R = r.i32();
    if (out.d < 3 || out.d > kMaxDim || out.R < 4)
        throw CorruptSnapshotError(path + ": bad field header");
    out.a_d = r.f64();
    out.a_fit = r.f64();
    out.residual = r.f64();
    out.g = GridFunction(out.d, out.R);
    for (std::int64_t i = 0; i < out.g.box().size(); ++i) {
        out.g.raw(i) = r.f64();
        out.g.raw_define(i);
    }
    if (!r.at_end()) throw CorruptSnapshotError(path + ": trailing bytes");
    return out;
}

}  // namespace idla
