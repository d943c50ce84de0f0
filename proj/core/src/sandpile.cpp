#include "idla/sandpile.hpp"

#include <algorithm>
#include <cmath>

#include "idla/stats.hpp"

namespace idla {

SandpileWeight divisible_sandpile(int d, double r, ToppleOrder order, double threshold) {
    LatticeGeometry geom(d);
    if (!(r > 0.0)) throw ContractError("divisible_sandpile: r > 0 required");
    if (!(threshold > 0.0)) throw ContractError("divisible_sandpile: threshold > 0 required");

    SandpileWeight out;
    out.d = d;
    out.r = r;
    out.initial_mass = geom.omega_d() * std::pow(r, d);

    // mass never escapes B_{r+1}; one more ring so neighbor reads stay in-box
    const int W = int(std::ceil(r)) + 2;
    out.w = GridFunction(d, W);
    GridFunction& w = out.w;
    const BoxIndex& box = w.box();
    for (std::int64_t i = 0; i < box.size(); ++i) w.raw_define(i);
    w.set(Site{}, out.initial_mass);

    std::vector<std::int64_t> active;  // sites that ever toppled, for the parallel order
    for (std::int64_t i = 0; i < box.size(); ++i) active.push_back(i);

    const double share = 1.0 / (2 * d);
    std::vector<double> emit(std::size_t(box.size()), 0.0);

    const std::int64_t sweep_cap = 4000 * std::int64_t(W) * W + 100000;
    double max_excess = out.initial_mass;
    std::int64_t sweep = 0;
    for (; sweep < sweep_cap && max_excess >= threshold; ++sweep) {
        max_excess = 0.0;
        if (order == ToppleOrder::parallel) {
            // Jacobi style: collect all the excess, then distribute
            for (const std::int64_t i : active) {
                const double excess = w.raw(i) - 1.0;
                if (excess > 0.0) {
                    emit[std::size_t(i)] = excess;
                    w.raw(i) = 1.0;
                    max_excess = std::max(max_excess, excess);
                }
            }
            if (max_excess == 0.0) break;
            for (const std::int64_t i : active) {
                const double q = emit[std::size_t(i)];
                if (q == 0.0) continue;
                emit[std::size_t(i)] = 0.0;
                const Site x = box.site(i);
                int max_coord = 0;
                for (int j = 0; j < d; ++j) max_coord = std::max(max_coord, std::abs(x[j]));
                if (max_coord >= W)
                    throw SolverError("divisible_sandpile: mass reached the box edge");
                for (int axis = 0; axis < d; ++axis) {
                    w.raw(i - box.stride(axis)) += q * share;
                    w.raw(i + box.stride(axis)) += q * share;
                }
            }
        } else {
            // Gauss-Seidel style single-site toppling in a fixed scan order
            const bool fwd = order == ToppleOrder::lex;
            for (std::int64_t n = 0; n < box.size(); ++n) {
                const std::int64_t i = fwd ? n : box.size() - 1 - n;
                const double excess = w.raw(i) - 1.0;
                if (excess <= 0.0) continue;
                max_excess = std::max(max_excess, excess);
                w.raw(i) = 1.0;
                const Site x = box.site(i);
                int max_coord = 0;
                for (int j = 0; j < d; ++j) max_coord = std::max(max_coord, std::abs(x[j]));
                if (max_coord >= W)
                    throw SolverError("divisible_sandpile: mass reached the box edge");
                for (int axis = 0; axis < d; ++axis) {
                    w.raw(i - box.stride(axis)) += excess * share;
                    w.raw(i + box.stride(axis)) += excess * share;
                }
            }
        }
    }
    if (max_excess >= threshold)
        throw SolverError("divisible_sandpile: excess " + std::to_string(max_excess) +
                          " after sweep cap");
    out.sweeps = sweep;
    for (std::int64_t i = 0; i < box.size(); ++i)
        out.final_excess = std::max(out.final_excess, w.raw(i) - 1.0);
    out.final_excess = std::max(out.final_excess, 0.0);

    stats::KahanSum mass;
    for (std::int64_t i = 0; i < box.size(); ++i) mass.add(w.raw(i));
    out.mass_drift = std::abs(mass.value() - out.initial_mass);

    // fitted inner radius: w = 1 (to solver tolerance) on B_{r - c_inner}
    double worst = r + 1.0;
    for (std::int64_t i = 0; i < box.size(); ++i) {
        if (w.raw(i) >= 1.0 - 1e-9) continue;
        worst = std::min(worst, box.site(i).norm());
    }
    out.c_inner = std::max(0.0, r - worst);
    return out;
}

MeanValueCheck mean_value_residual(const SandpileWeight& sw, const GridFunction& u) {
    const BoxIndex& box = sw.w.box();
    const double u0 = u.at(Site{});

    MeanValueCheck out;
    stats::KahanSum sum;
    stats::KahanSum abs_sum;
    for (std::int64_t i = 0; i < box.size(); ++i) {
        const double weight = sw.w.raw(i);
        if (weight == 0.0) continue;
        const Site x = box.site(i);
        if (!u.defined(x))
            throw ContractError("mean_value_residual: u not defined on the support of w");
        const double centered = u.at(x) - u0;
        sum.add(weight * centered);
        abs_sum.add(std::abs(centered));
    }
    out.residual = sum.value();
    out.bound = sw.final_excess * abs_sum.value();
    return out;
}

}  // namespace idla
