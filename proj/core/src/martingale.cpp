#include "idla/martingale.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>

#include "idla/engine.hpp"
#include "idla/stats.hpp"

namespace idla {

MartingaleTrace run_martingale(const HarmonicField& field, const Site& y, int k,
                               std::int64_t particles, RngStream rng,
                               StoppedCluster* out_cluster) {
    if (field.domain.y != y || field.domain.k != k)
        throw ContractError("run_martingale: P field solved for a different (y, k)");

    const LatticeGeometry geom(field.d);
    MartingaleTrace trace;
    trace.particle_steps.reserve(std::size_t(particles));
    trace.M.reserve(std::size_t(particles));
    trace.Shat.reserve(std::size_t(particles));

    stats::KahanSum m_acc;
    stats::KahanSum s_acc;
    const GridFunction& P = field.P;
    const BoxIndex& box = P.box();

    auto observer = [&](const Site& from, const Site& to) {
        const double dm = P.raw(box.flat(to)) - P.raw(box.flat(from));
        m_acc.add(dm);
        s_acc.add(dm * dm);
    };

    StoppedCluster sc{Cluster(geom, rng), {}, 0, y, k, y.norm(), {}, 0, 0};
    for (std::int64_t n = 0; n < particles; ++n) {
        detail::grow_stopped_impl(sc, 1, observer);
        trace.particle_steps.push_back(sc.steps_total);
        trace.M.push_back(m_acc.value());
        trace.Shat.push_back(s_acc.value());
    }
    trace.steps_total = sc.steps_total;
    if (out_cluster) *out_cluster = std::move(sc);
    return trace;
}

double recompute_martingale(const HarmonicField& field, const StoppedCluster& sc) {
    stats::KahanSum sum;
    const double p0 = field.p0;
    sc.inner.for_each_occupied(
        [&](const Site& x, std::int64_t) { sum.add(field.P.at(x) - p0); });
    sum.add(double(sc.boundary_mass()) * (0.0 - p0));
    sum.add(double(sc.absorbed_at_y) * (1.0 - p0));
    return sum.value();
}

DiagnosticSchedule schedule(ScheduleKind kind, const LatticeGeometry& geom,
                            const ScheduleParams& params) {
    DiagnosticSchedule out;
    out.kind = kind;
    out.k = params.k;
    out.m = params.m;
    out.ell = params.ell;
    if (params.k < 1) throw ContractError("schedule: k >= 1 required");
    const double wd = geom.omega_d();

    if (kind == ScheduleKind::early_lemma) {
        const double r = params.radius;
        if (!(r > 0.0) || params.m < 0.0 || r <= params.m)
            throw ContractError("schedule: early lemma needs r > m >= 0");
        out.s = r + 2.0 * params.m;  // |y| in the early-lemma setup
        out.T0 = 0;
        out.T1 = std::int64_t(std::ceil(wd * std::pow(r - params.m, geom.dim())));
    } else {
        const double s = params.radius;
        if (!(s >= 1.0) || params.ell < 0.0 || params.m < 0.0)
            throw ContractError("schedule: late lemma needs s >= 1 and m, ell >= 0");
        out.s = s;
        out.T1 = std::int64_t(std::floor(wd * std::pow(s + params.ell, geom.dim())));
        const double inner = s + params.k - 3.0 * params.m;
        out.T0 = inner <= 0.0 ? 0
                              : std::int64_t(std::floor(wd * std::pow(inner, geom.dim())));
    }
    out.which = out.s < 2.0 * params.k ? ScheduleCase::near : ScheduleCase::far;
    if (out.T0 > out.T1) throw ContractError("schedule: T0 exceeds T1");
    out.Q = params.p0 * double(out.T1);
    return out;
}

QvSummary qv_summary(std::vector<QvGroup> groups) {
    if (groups.empty()) throw ContractError("qv_summary: no trace groups");
    for (const auto& g : groups)
        if (g.shat_final.empty())
            throw ContractError("qv_summary: empty trace group at s = " + std::to_string(g.s));

    std::sort(groups.begin(), groups.end(),
              [](const QvGroup& a, const QvGroup& b) { return a.s < b.s; });

    QvSummary out;
    for (const auto& g : groups) {
        QvSummary::Row row;
        row.s = g.s;
        row.runs = int(g.shat_final.size());
        row.median = stats::median(g.shat_final);
        row.p95 = stats::percentile(g.shat_final, 95.0);
        out.rows.push_back(row);
    }
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        out.consecutive_ratios.push_back(out.rows[i].median / out.rows[i - 1].median);
    if (out.rows.size() >= 3) {
        bool growing = true;
        for (const double ratio : out.consecutive_ratios) growing = growing && ratio > 1.0;
        out.growth_flag = growing;
    }
    return out;
}

void write_trace_csv(const MartingaleTrace& trace, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ContractError("write_trace_csv: cannot open " + path);
    std::fprintf(fp, "particle_index,t,M,Shat\n");
    for (std::size_t i = 0; i < trace.M.size(); ++i) {
        std::fprintf(fp, "%zu,%" PRId64 ",%.17g,%.17g\n", i + 1, trace.particle_steps[i],
                     trace.M[i], trace.Shat[i]);
    }
    std::fclose(fp);
}

}  // namespace idla
