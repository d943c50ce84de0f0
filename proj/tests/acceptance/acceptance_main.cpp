// Acceptance suite: one line per criterion, nonzero exit when any
// criterion fails.  Every tolerance is pinned here, in code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "idla/engine.hpp"
#include "idla/fluctuation.hpp"
#include "idla/green.hpp"
#include "idla/harmonic.hpp"
#include "idla/martingale.hpp"
#include "idla/parallel.hpp"
#include "idla/sandpile.hpp"
#include "idla/stats.hpp"

using namespace idla;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %d. %s: %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void run_criterion(int number, const std::string& name,
                   const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [pass, detail] = body();
        report(number, name, pass, detail);
    } catch (const std::exception& e) {
        report(number, name, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

const LatticeGeometry geom3(3);

// shared heavy artifacts
GreenField* g_green80 = nullptr;

// ---------------------------------------------------------------------------
// 1. Sphericity scaling
// ---------------------------------------------------------------------------
std::pair<bool, std::string> sphericity_scaling() {
    ExperimentConfig cfg;
    cfg.d = 3;
    cfg.radii = {8.0, 16.0, 32.0, 64.0};
    cfg.seeds_per_radius = 50;
    cfg.acceleration = true;
    cfg.kernel_cap = 16;
    cfg.master_seed = 2026;
    cfg.tentacle_m = 2;

    const auto t32_start = std::chrono::steady_clock::now();
    ExperimentConfig cfg32 = cfg;
    cfg32.radii = {32.0};
    const SweepResult r32 = sweep(cfg32);
    const double t32 = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                     t32_start).count();

    const SweepResult full = sweep(cfg);
    for (const auto& row : full.rows)
        if (row.failed) return {false, "run failed: " + row.error};

    const auto& aggs = full.by_radius;
    const double a32 = aggs[2].a_hat_median;
    const double a64 = aggs[3].a_hat_median;
    const double octave_ratio = a64 / a32;

    // fitted a_hat may not grow by more than 1.5x across any octave
    bool octaves_tame = true;
    for (std::size_t i = 1; i < aggs.size(); ++i)
        octaves_tame = octaves_tame &&
                       aggs[i].a_hat_median <= 1.5 * aggs[i - 1].a_hat_median;

    // every 2-early site keeps its trail: the occupied fraction of
    // B(z,2) at arrival is at least 3/m^d (tip, parent, grandparent)
    double tentacle_floor = 1.0;
    for (const auto& row : full.rows)
        if (row.tentacle.any) tentacle_floor = std::min(tentacle_floor, row.tentacle.min_fraction);

    const bool pass = full.exponent_median <= 0.75 && full.exponent_max <= 0.75 &&
                      octave_ratio >= 0.5 && octave_ratio <= 2.0 && octaves_tame &&
                      tentacle_floor >= 0.3 && full.runtime_s <= 1800.0 && t32 <= 300.0;
    std::ostringstream os;
    os << "exponent(median)=" << fmt(full.exponent_median)
       << " exponent(max)=" << fmt(full.exponent_max)
       << " a_hat(32)=" << fmt(a32) << " a_hat(64)=" << fmt(a64)
       << " octave ratio=" << fmt(octave_ratio) << " tentacle floor=" << fmt(tentacle_floor)
       << " sweep=" << fmt(full.runtime_s) << "s r32 sweep=" << fmt(t32) << "s";
    (void)r32;
    return {pass, os.str()};
}

// ---------------------------------------------------------------------------
// 2. Green function audit
// ---------------------------------------------------------------------------
double mc_green_origin(std::int64_t walks, double kill_radius, double a_d) {
    // visit-counting oracle: count returns to the origin until the walk
    // leaves B_kill, then credit the expected future visits a_d/|exit|
    const double kill2 = kill_radius * kill_radius;
    const int jobs = 64;
    std::vector<double> partial(jobs, 0.0);
    parallel_for(std::size_t(jobs), [&](std::size_t job) {
        RngStream rng(777000 + std::uint64_t(job), 0);
        const std::int64_t n = walks / jobs + (std::int64_t(job) < walks % jobs ? 1 : 0);
        double acc = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            Site x{};
            double visits = 1.0;
            while (true) {
                const auto r = rng.uniform_below(6);
                x[int(r >> 1)] += (r & 1) ? 1 : -1;
                const double n2 = double(x.norm2());
                if (n2 == 0.0) visits += 1.0;
                if (n2 > kill2) {
                    visits += a_d / std::sqrt(n2);
                    break;
                }
            }
            acc += visits;
        }
        partial[job] = acc;
    });
    double total = 0.0;
    for (const double p : partial) total += p;
    return total / double(walks);
}

std::pair<bool, std::string> green_audit() {
    const GreenField& gf = *g_green80;
    const double fit_err = std::abs(gf.a_fit / gf.a_d - 1.0);

    const double u1 = uchiyama_residual(gf, 5.0, 10.0);
    const double u2 = uchiyama_residual(gf, 10.0, 20.0);
    const double u3 = uchiyama_residual(gf, 20.0, 40.0);
    const bool windows_ok = u2 <= 1.1 * u1 && u3 <= 1.1 * u2;

    const double g0_mc = mc_green_origin(1000000, 40.0, gf.a_d);
    const double g0 = gf.at(Site{});
    const double mc_err = std::abs(g0 - g0_mc) / g0_mc;

    const bool pass = fit_err <= 0.01 && windows_ok && mc_err <= 0.005;
    std::ostringstream os;
    os << "a_fit=" << fmt(gf.a_fit) << " vs 3/(2pi)=" << fmt(gf.a_d) << " (err "
       << fmt(fit_err * 100) << "%), uchiyama windows " << fmt(u1) << " >= " << fmt(u2)
       << " >= " << fmt(u3) << ", g0=" << fmt(g0) << " vs MC " << fmt(g0_mc) << " (err "
       << fmt(mc_err * 100) << "%)";
    return {pass, os.str()};
}

// ---------------------------------------------------------------------------
// 3. Exact mean value property
// ---------------------------------------------------------------------------
std::pair<bool, std::string> mean_value_property() {
    const GreenField gf = compute_green(3, 28);
    bool pass = true;
    std::ostringstream os;
    for (const double r : {4.0, 6.0, 8.0}) {
        const SandpileWeight sw = divisible_sandpile(3, r);
        Site z0;
        z0[0] = 2 * std::int32_t(std::ceil(r));
        z0[1] = 1;
        GridFunction u(3, sw.w.box().half_width());
        for (std::int64_t i = 0; i < u.box().size(); ++i) {
            u.raw(i) = gf.at(u.box().site(i) - z0);
            u.raw_define(i);
        }
        const MeanValueCheck mv = mean_value_residual(sw, u);
        pass = pass && std::abs(mv.residual) <= 1e-7 && sw.mass_drift <= 1e-9;
        os << "r=" << r << ": residual=" << fmt(mv.residual) << " drift=" << fmt(sw.mass_drift)
           << "  ";
    }
    return {pass, os.str()};
}

// ---------------------------------------------------------------------------
// 4. Harmonic solver vs Monte Carlo + constant stability
// ---------------------------------------------------------------------------
double mc_hitting_probability(const Site& y, int k, std::int64_t walks, std::uint64_t seed) {
    const double outer2 = (y.norm() + k) * (y.norm() + k) + 1e-12;
    const int jobs = 64;
    std::vector<std::int64_t> partial(jobs, 0);
    parallel_for(std::size_t(jobs), [&](std::size_t job) {
        RngStream rng(seed + job, 0);
        const std::int64_t n = walks / jobs + (std::int64_t(job) < walks % jobs ? 1 : 0);
        std::int64_t hits = 0;
        for (std::int64_t i = 0; i < n; ++i) {
            Site x{};
            while (true) {
                const auto r = rng.uniform_below(6);
                x[int(r >> 1)] += (r & 1) ? 1 : -1;
                if (x == y) {
                    ++hits;
                    break;
                }
                if (double(x.norm2()) > outer2) break;
            }
        }
        partial[job] = hits;
    });
    std::int64_t total = 0;
    for (const auto p : partial) total += p;
    return double(total) / double(walks);
}

std::pair<bool, std::string> harmonic_audit() {
    bool pass = true;
    std::ostringstream os;

    const std::int64_t walks = 1000000;
    const struct {
        Site y;
        int k;
        std::uint64_t seed;
    } cases[] = {{Site(3, 0, 0), 1, 8101}, {Site(8, 0, 0), 2, 8102}};
    for (const auto& [y, k, seed] : cases) {
        const HarmonicField hf = solve_P(3, y, k);
        const double p_hat = mc_hitting_probability(y, k, walks, seed);
        const double sigma = std::sqrt(hf.p0 * (1.0 - hf.p0) / double(walks));
        const double z = std::abs(p_hat - hf.p0) / sigma;
        pass = pass && z <= 4.0;
        os << "P0(s=" << y.norm() << ",k=" << k << ")=" << fmt(hf.p0) << " MC=" << fmt(p_hat)
           << " (" << fmt(z) << " sigma)  ";
    }

    // dimensional-constant evidence: all audit statistics within a
    // factor 4 across s in {8, 16, 32} at k = 1
    std::map<std::string, std::vector<double>> table;
    for (const int s : {8, 16, 32}) {
        Site y;
        y[0] = s;
        const HarmonicField hf = solve_P(3, y, 1);
        const UpperAuditReport up = audit_upper(hf);
        const LowerAuditReport low = audit_lower(hf, std::max(1, s / 8));
        const ShellSumReport sh = shell_sums(hf);
        table["C_a"].push_back(up.C_a);
        table["C_b"].push_back(up.C_b_stated);
        table["C_c"].push_back(up.C_c.value());
        table["c_a"].push_back(low.c_a);
        table["c_b"].push_back(low.c_b.value());
        table["shell/k"].push_back(sh.shell_over_k);
        table["ball/k"].push_back(sh.ball_over_k);
        table["ball/k2"].push_back(sh.full_ball_over_k2);
    }
    for (const auto& [label, values] : table) {
        const double lo = *std::min_element(values.begin(), values.end());
        const double hi = *std::max_element(values.begin(), values.end());
        const bool ok = lo > 0.0 && hi / lo <= 4.0;
        pass = pass && ok;
        if (!ok) os << label << " spread " << fmt(hi / lo) << "x  ";
    }
    os << "constants spread <= 4x over s in {8,16,32}";
    return {pass, os.str()};
}

// ---------------------------------------------------------------------------
// 5. Harmonic measure vs grid Brownian motion
// ---------------------------------------------------------------------------
std::pair<bool, std::string> harmonic_measure_audit() {
    const GreenField& gf = *g_green80;
    const double alpha = gf.a_d / 10.25;
    const HarmonicMeasure hm = harmonic_measure_levelset(gf, alpha);

    const double sum_err = std::abs(hm.sum_p - 1.0);
    bool pass = sum_err <= 1e-8;

    // star-graph walker tables on a compact box
    const int W = 16;
    const BoxIndex box(3, W);
    struct Edges {
        double frac[6];
        std::size_t orbit[6];
        bool crossing = false;
    };
    std::vector<Edges> table(std::size_t(box.size()));
    for (auto& e : table)
        for (int i = 0; i < 6; ++i) e.frac[i] = 0.0;
    std::vector<double> orbit_p(hm.orbit_count, 0.0);
    for (const auto& bp : hm.boundary) {
        int axis = 0, dir = 0;
        for (int i = 0; i < 3; ++i)
            if (bp.outside[i] != bp.inside[i]) {
                axis = i;
                dir = bp.outside[i] - bp.inside[i];
            }
        Edges& e = table[std::size_t(box.flat(bp.inside))];
        e.crossing = true;
        e.frac[axis * 2 + (dir > 0 ? 1 : 0)] = bp.frac;
        e.orbit[std::size_t(axis * 2 + (dir > 0 ? 1 : 0))] = bp.orbit;
        orbit_p[bp.orbit] += bp.p;
    }

    const std::int64_t walks = 1000000;
    const int jobs = 64;
    std::vector<std::vector<std::int64_t>> partial(std::size_t(jobs),
                                                   std::vector<std::int64_t>(hm.orbit_count, 0));
    parallel_for(std::size_t(jobs), [&](std::size_t job) {
        RngStream rng(9100 + std::uint64_t(job), 0);
        const std::int64_t n = walks / jobs + (std::int64_t(job) < walks % jobs ? 1 : 0);
        auto& hits = partial[job];
        for (std::int64_t i = 0; i < n; ++i) {
            Site x{};
            while (true) {
                const Edges& e = table[std::size_t(box.flat(x))];
                if (!e.crossing) {
                    const auto r = rng.uniform_below(6);
                    x[int(r >> 1)] += (r & 1) ? 1 : -1;
                    continue;
                }
                double weights[6];
                double total = 0.0;
                for (int k = 0; k < 6; ++k) {
                    weights[k] = e.frac[k] > 0.0 ? 1.0 / e.frac[k] : 1.0;
                    total += weights[k];
                }
                double u = rng.next_double() * total;
                int chosen = 0;
                for (; chosen < 5; ++chosen) {
                    u -= weights[chosen];
                    if (u < 0.0) break;
                }
                if (e.frac[chosen] > 0.0) {
                    ++hits[e.orbit[std::size_t(chosen)]];
                    break;
                }
                x[chosen / 2] += (chosen % 2) ? 1 : -1;
            }
        }
    });

    double worst_z = 0.0;
    for (std::size_t o = 0; o < hm.orbit_count; ++o) {
        std::int64_t hits = 0;
        for (const auto& p : partial) hits += p[o];
        const double expectation = orbit_p[o] * double(walks);
        const double sigma = std::sqrt(double(walks) * orbit_p[o] * (1.0 - orbit_p[o]));
        worst_z = std::max(worst_z, std::abs(double(hits) - expectation) / sigma);
    }
    pass = pass && worst_z <= 4.0;

    std::ostringstream os;
    os << "sum p - 1 = " << fmt(hm.sum_p - 1.0) << ", " << hm.boundary.size()
       << " boundary points in " << hm.orbit_count << " orbits, worst MC deviation "
       << fmt(worst_z) << " sigma";
    return {pass, os.str()};
}

// ---------------------------------------------------------------------------
// 6. Martingale suite
// ---------------------------------------------------------------------------
std::pair<bool, std::string> martingale_suite() {
    std::ostringstream os;
    bool pass = true;

    // (a,b) one long run: mean-zero z-test over >= 1e6 steps and the
    // terminal accounting identity
    {
        const Site y(16, 0, 0);
        const HarmonicField hf = solve_P(3, y, 1);
        const DiagnosticSchedule sched = schedule(
            ScheduleKind::late_lemma, geom3,
            {.radius = 16.0, .m = 2.0, .ell = 2.0, .k = 1, .p0 = hf.p0});
        StoppedCluster sc{Cluster(geom3, RngStream{}), {}, 0, y, 1, y.norm(), {}, 0, 0};
        const MartingaleTrace trace = run_martingale(hf, y, 1, sched.T1, RngStream(99, 0), &sc);
        const double z = trace.final_M() / std::sqrt(trace.final_Shat());
        const double gap = std::abs(recompute_martingale(hf, sc) - trace.final_M());
        const bool ok = trace.steps_total >= 1000000 && std::abs(z) < 2.576 && gap <= 1e-8;
        pass = pass && ok;
        os << "z=" << fmt(z) << " over " << trace.steps_total << " steps, accounting gap "
           << fmt(gap) << "; ";
    }

    // (c) KS normality of M(T1)/sqrt(Shat(T1)) over 500 runs
    {
        const Site y(12, 0, 0);
        const HarmonicField hf = solve_P(3, y, 1);
        const DiagnosticSchedule sched = schedule(
            ScheduleKind::early_lemma, geom3,
            {.radius = 8.0, .m = 2.0, .ell = 0.0, .k = 1, .p0 = hf.p0});
        const int runs = 500;
        std::vector<double> normalized(runs);
        std::vector<double> gaps(runs);
        parallel_for(std::size_t(runs), [&](std::size_t i) {
            StoppedCluster sc{Cluster(geom3, RngStream{}), {}, 0, y, 1, y.norm(), {}, 0, 0};
            const MartingaleTrace t =
                run_martingale(hf, y, 1, sched.T1, RngStream(11, std::uint64_t(i)), &sc);
            normalized[i] = t.final_M() / std::sqrt(t.final_Shat());
            gaps[i] = std::abs(recompute_martingale(hf, sc) - t.final_M());
        });
        const double d_stat = stats::ks_statistic_normal(normalized);
        const double pvalue = stats::ks_pvalue(d_stat, normalized.size());
        const double max_gap = *std::max_element(gaps.begin(), gaps.end());
        // per-run nullity: every run's mean step increment within 4 SE
        double max_z = 0.0;
        for (const double z : normalized) max_z = std::max(max_z, std::abs(z));
        const bool ok = pvalue >= 0.01 && max_gap <= 1e-8 && max_z <= 4.0;
        pass = pass && ok;
        os << "KS D=" << fmt(d_stat) << " p=" << fmt(pvalue) << " (500 runs, T1=" << sched.T1
           << "), max |z| " << fmt(max_z) << ", max gap " << fmt(max_gap) << "; ";
    }

    // (d) constant-order quadratic variation across radii
    {
        std::vector<QvGroup> groups;
        for (const int s : {8, 16, 32}) {
            Site y;
            y[0] = s;
            const HarmonicField hf = solve_P(3, y, 1);
            const DiagnosticSchedule sched = schedule(
                ScheduleKind::late_lemma, geom3,
                {.radius = double(s), .m = 2.0, .ell = 2.0, .k = 1, .p0 = hf.p0});
            const int runs = 30;
            QvGroup group;
            group.s = double(s);
            group.shat_final.resize(runs);
            parallel_for(std::size_t(runs), [&](std::size_t i) {
                const MartingaleTrace t =
                    run_martingale(hf, y, 1, sched.T1, RngStream(33, std::uint64_t(i)));
                group.shat_final[i] = t.final_Shat();
            });
            groups.push_back(std::move(group));
        }
        const QvSummary summary = qv_summary(groups);
        bool ok = true;
        os << "median Shat(T1):";
        for (const auto& row : summary.rows) os << " s=" << row.s << ": " << fmt(row.median);
        os << ", ratios:";
        for (const double ratio : summary.consecutive_ratios) {
            ok = ok && ratio >= 0.5 && ratio <= 2.0;
            os << " " << fmt(ratio);
        }
        ok = ok && !summary.growth_flag;
        pass = pass && ok;
    }
    return {pass, os.str()};
}

// ---------------------------------------------------------------------------
// 7. Exactness of acceleration (A/B settlement distributions)
// ---------------------------------------------------------------------------
std::pair<bool, std::string> acceleration_ab() {
    const Cluster fixed = grow(geom3, 99, RngStream(42, 0));
    const auto kernels = build_kernel_ladder(3, 4);

    const std::int64_t trials = 100000;
    const int jobs = 64;
    std::vector<std::map<Site, std::int64_t>> plain_partial(jobs), accel_partial(jobs);
    parallel_for(std::size_t(jobs), [&](std::size_t job) {
        const std::int64_t n = trials / jobs + (std::int64_t(job) < trials % jobs ? 1 : 0);
        RngStream rng_a(7100 + std::uint64_t(job), 0);
        RngStream rng_b(7200 + std::uint64_t(job), 0);
        for (std::int64_t i = 0; i < n; ++i) {
            ++plain_partial[job][sample_settlement(fixed, rng_a, nullptr)];
            ++accel_partial[job][sample_settlement(fixed, rng_b, &kernels)];
        }
    });
    std::map<Site, std::pair<std::int64_t, std::int64_t>> counts;
    for (int j = 0; j < jobs; ++j) {
        for (const auto& [site, n] : plain_partial[std::size_t(j)]) counts[site].first += n;
        for (const auto& [site, n] : accel_partial[std::size_t(j)]) counts[site].second += n;
    }

    std::vector<std::int64_t> a, b;
    for (const auto& [site, pair] : counts) {
        a.push_back(pair.first);
        b.push_back(pair.second);
    }
    const stats::ChiSq chi = stats::chisq_two_sample(a, b, 10);
    const bool pass = chi.pvalue >= 0.01;
    std::ostringstream os;
    os << counts.size() << " settlement sites, chi2=" << fmt(chi.statistic)
       << " dof=" << chi.dof << " p=" << fmt(chi.pvalue) << " (1e5 trials per arm)";
    return {pass, os.str()};
}

// ---------------------------------------------------------------------------
// 8. Iteration schedule terminal bound
// ---------------------------------------------------------------------------
std::pair<bool, std::string> schedule_bound() {
    bool pass = true;
    std::ostringstream os;
    for (const double T : {1e4, 1e6, 1e9}) {
        for (const double C : {2.0, 5.0}) {
            const IterationSchedule sched = iteration_schedule(T, C);
            const bool ok =
                sched.majorant_ok && sched.ell.back() <= sched.terminal_bound * 1.01;
            pass = pass && ok;
            os << "T=" << fmt(T) << ",C=" << C << ": ell_J=" << fmt(sched.ell.back())
               << "<=" << fmt(sched.terminal_bound * 1.01) << "  ";
        }
    }
    return {pass, os.str()};
}

// ---------------------------------------------------------------------------
// 9. Reproducibility
// ---------------------------------------------------------------------------
std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::pair<bool, std::string> reproducibility() {
    ExperimentConfig cfg;
    cfg.d = 3;
    cfg.radii = {8.0, 16.0};
    cfg.seeds_per_radius = 5;
    cfg.acceleration = true;
    cfg.kernel_cap = 8;
    cfg.master_seed = 7;
    cfg.tentacle_m = 3;

    cfg.out_csv = "acceptance_sweep_a.csv";
    sweep(cfg);
    cfg.out_csv = "acceptance_sweep_b.csv";
    sweep(cfg);
    const bool csv_ok = slurp("acceptance_sweep_a.csv") == slurp("acceptance_sweep_b.csv") &&
                        !slurp("acceptance_sweep_a.csv").empty();

    const Cluster c1 = grow(geom3, 20000, RngStream(5, 0));
    const Cluster c2 = grow(geom3, 20000, RngStream(5, 0));
    save_snapshot(c1, "acceptance_snap_a.idla");
    save_snapshot(c2, "acceptance_snap_b.idla");
    const bool snap_ok =
        slurp("acceptance_snap_a.idla") == slurp("acceptance_snap_b.idla") &&
        !slurp("acceptance_snap_a.idla").empty();

    for (const char* path : {"acceptance_sweep_a.csv", "acceptance_sweep_b.csv",
                             "acceptance_snap_a.idla", "acceptance_snap_b.idla"})
        std::remove(path);

    std::ostringstream os;
    os << "sweep CSVs byte-identical: " << (csv_ok ? "yes" : "NO")
       << ", snapshots byte-identical: " << (snap_ok ? "yes" : "NO");
    return {csv_ok && snap_ok, os.str()};
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    std::printf("acceptance suite (d=3)\n");

    GreenField green80 = compute_green(3, 80);
    g_green80 = &green80;

    run_criterion(1, "sphericity scaling (Theorem 1, desk scale)", sphericity_scaling);
    run_criterion(2, "Green function audit", green_audit);
    run_criterion(3, "exact mean value property", mean_value_property);
    run_criterion(4, "harmonic solver audit", harmonic_audit);
    run_criterion(5, "harmonic measure of level sets", harmonic_measure_audit);
    run_criterion(6, "martingale suite", martingale_suite);
    run_criterion(7, "exactness of acceleration", acceleration_ab);
    run_criterion(8, "iteration schedule bound", schedule_bound);
    run_criterion(9, "reproducibility", reproducibility);

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d criterion(s) failed; total %.1f s\n", g_failures, elapsed);
    return g_failures == 0 ? 0 : 1;
}
