// idla: grow internal DLA clusters and run the deterministic audits
// (Green function, hitting probabilities, sandpile weight, growth
// martingale, deviation scans) from the command line.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "idla/engine.hpp"
#include "idla/fluctuation.hpp"
#include "idla/green.hpp"
#include "idla/harmonic.hpp"
#include "idla/martingale.hpp"
#include "idla/sandpile.hpp"
#include "idla/stats.hpp"

using nlohmann::json;
using namespace idla;

namespace {

Site parse_site(const std::vector<std::int64_t>& coords) {
    if (coords.size() < 3 || coords.size() > std::size_t(kMaxDim))
        throw ContractError("site tuple needs 3.." + std::to_string(kMaxDim) + " coordinates");
    Site y;
    for (std::size_t i = 0; i < coords.size(); ++i) y[int(i)] = std::int32_t(coords[i]);
    return y;
}

void emit(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(path);
        if (!out) throw ContractError("cannot open " + path);
        out << j.dump(2) << "\n";
    }
}

json scan_to_json(const FluctuationReport& rpt) {
    return {{"d", rpt.d},           {"r", rpt.r},
            {"T", rpt.T},           {"master_seed", rpt.master_seed},
            {"stream_index", rpt.stream_index},
            {"mT", rpt.mT},         {"lT", rpt.lT},
            {"early_count", rpt.early_count},
            {"late_count", rpt.late_count},
            {"runtime_s", rpt.runtime_s}};
}

std::vector<JumpKernel> load_kernel_files(int d, const std::vector<std::string>& paths) {
    std::vector<JumpKernel> kernels;
    for (const auto& path : paths) {
        kernels.push_back(load_kernel(path));
        if (kernels.back().dim() != d)
            throw ContractError("cached kernel " + path + " has the wrong dimension");
    }
    return kernels;
}

int run_grow(int d, std::optional<double> r, std::optional<std::int64_t> t,
             std::uint64_t seed, bool accel, int kernel_cap,
             const std::vector<std::string>& kernel_cache,
             const std::string& snapshot_out, const std::string& report_out) {
    const LatticeGeometry geom(d);
    if (r.has_value() == t.has_value())
        throw ContractError("grow: give exactly one of --r and --t");
    const std::int64_t particles =
        t ? *t : std::int64_t(std::ceil(geom.omega_d() * std::pow(*r, d)));

    std::vector<JumpKernel> kernels;
    if (!kernel_cache.empty()) {
        kernels = load_kernel_files(d, kernel_cache);
        accel = true;
    } else if (accel) {
        kernels = build_kernel_ladder(d, kernel_cap);
    }
    const Cluster c = grow(geom, particles, RngStream(seed, 0),
                           kernels.empty() ? nullptr : &kernels);
    if (!snapshot_out.empty()) save_snapshot(c, snapshot_out);

    json j{{"d", d},
           {"particles", c.count()},
           {"master_seed", seed},
           {"inner_radius", c.inner_radius()},
           {"max_radius_bucket", c.max_radius_bucket()},
           {"accelerated", accel}};
    if (c.count() > 0) j["scan"] = scan_to_json(early_late_scan(c));
    if (!snapshot_out.empty()) j["snapshot"] = snapshot_out;
    emit(j, report_out);
    return 0;
}

int run_scan(const std::string& snapshot, int m, int ell, const std::string& out) {
    const Cluster c = load_snapshot(snapshot);
    const FluctuationReport rpt = early_late_scan(c);
    json j = scan_to_json(rpt);
    j["snapshot"] = snapshot;
    if (m >= 2) {
        const TentacleReport tr = tentacle_scan(c, m);
        j["tentacle"] = {{"m", tr.m},
                         {"early_sites", tr.early_sites},
                         {"any", tr.any}};
        if (tr.any) {
            j["tentacle"]["min_fraction"] = tr.min_fraction;
            std::vector<int> z(std::size_t(rpt.d));
            for (int i = 0; i < rpt.d; ++i) z[std::size_t(i)] = tr.argmin[i];
            j["tentacle"]["argmin"] = z;
        }
    }
    j["is_early_count_at_m"] = (m >= 1 && std::size_t(m) <= rpt.early_count.size())
                                   ? rpt.early_count[std::size_t(m - 1)]
                                   : 0;
    j["is_late_count_at_l"] = (ell >= 1 && std::size_t(ell) <= rpt.late_count.size())
                                  ? rpt.late_count[std::size_t(ell - 1)]
                                  : 0;
    emit(j, out);
    return 0;
}

int run_green(int d, int R, const std::string& out_csv, const std::string& cache_out,
              const std::string& cache_in, double r_min, double r_max) {
    GreenField gf = cache_in.empty() ? compute_green(d, R) : load_green(cache_in);
    if (!out_csv.empty()) write_field_csv(gf.g, out_csv);
    if (!cache_out.empty()) save_green(gf, cache_out);
    json j{{"d", gf.d},         {"R", gf.R},
           {"a_d", gf.a_d},     {"a_fit", gf.a_fit},
           {"residual", gf.residual}, {"g0", gf.at(Site{})}};
    if (r_max > 0.0) j["uchiyama_residual"] = uchiyama_residual(gf, r_min, r_max);
    emit(j, "");
    return 0;
}

int run_harmonic(const std::vector<std::int64_t>& y_coords, int k, bool audit, int m,
                 const std::string& out) {
    const Site y = parse_site(y_coords);
    const int d = int(y_coords.size());
    const HarmonicField hf = solve_P(d, y, k);
    json j{{"d", d},
           {"y", y_coords},
           {"s", hf.domain.s},
           {"k", k},
           {"P0", hf.p0},
           {"residual", hf.residual}};
    if (audit) {
        const UpperAuditReport up = audit_upper(hf);
        j["upper"] = {{"C_a", up.C_a},
                      {"C_b_stated", up.C_b_stated},
                      {"C_b_wide", up.C_b_wide}};
        if (up.C_c) j["upper"]["C_c"] = *up.C_c;
        const LowerAuditReport low = audit_lower(hf, hf.domain.k == 1 ? m : 0);
        j["lower"] = {{"c_a", low.c_a}};
        if (low.c_b) j["lower"]["c_b"] = *low.c_b;
        const ShellSumReport shells = shell_sums(hf);
        j["shell_sums"] = {{"shell_over_k", shells.shell_over_k},
                           {"ball_over_k", shells.ball_over_k},
                           {"full_ball_over_k2", shells.full_ball_over_k2}};
    }
    emit(j, out);
    return 0;
}

int run_sandpile(int d, double r, bool check_mvp, const std::string& out_csv) {
    const SandpileWeight sw = divisible_sandpile(d, r);
    if (!out_csv.empty()) write_field_csv(sw.w, out_csv);
    json j{{"d", d},
           {"r", r},
           {"initial_mass", sw.initial_mass},
           {"mass_drift", sw.mass_drift},
           {"c_inner", sw.c_inner},
           {"sweeps", sw.sweeps},
           {"final_excess", sw.final_excess}};
    if (check_mvp) {
        // translated Green function: discrete harmonic on the support,
        // sharing no symmetry with w
        const int R = 3 * int(std::ceil(r)) + 4;
        const GreenField gf = compute_green(d, R);
        Site z0;
        z0[0] = 2 * std::int32_t(std::ceil(r));
        z0[1] = 1;
        GridFunction u(d, sw.w.box().half_width());
        for (std::int64_t i = 0; i < u.box().size(); ++i) {
            u.raw(i) = gf.at(u.box().site(i) - z0);
            u.raw_define(i);
        }
        const MeanValueCheck mv = mean_value_residual(sw, u);
        j["mean_value_residual"] = mv.residual;
        j["mean_value_bound"] = mv.bound;
    }
    emit(j, "");
    return 0;
}

int run_martingale_cmd(const std::vector<std::int64_t>& y_coords, int k, int runs,
                       const std::string& kind, double m, double ell, std::uint64_t seed,
                       const std::string& trace_prefix, const std::string& out) {
    const Site y = parse_site(y_coords);
    const int d = int(y_coords.size());
    const LatticeGeometry geom(d);
    const HarmonicField hf = solve_P(d, y, k);

    ScheduleParams params;
    params.m = m;
    params.ell = ell;
    params.k = k;
    params.p0 = hf.p0;
    DiagnosticSchedule sched;
    if (kind == "early") {
        params.radius = hf.domain.s - 2.0 * m;  // y sits at r + 2m in this setup
        sched = schedule(ScheduleKind::early_lemma, geom, params);
    } else if (kind == "late") {
        params.radius = hf.domain.s;
        sched = schedule(ScheduleKind::late_lemma, geom, params);
    } else {
        throw ContractError("martingale: --schedule must be 'early' or 'late'");
    }

    std::vector<double> terminal_S, normalized;
    json per_run = json::array();
    for (int i = 0; i < runs; ++i) {
        StoppedCluster sc{Cluster(geom, RngStream{}), {}, 0, y, k, y.norm(), {}, 0, 0};
        const MartingaleTrace trace =
            run_martingale(hf, y, k, sched.T1, RngStream(seed, std::uint64_t(i)), &sc);
        if (!trace_prefix.empty())
            write_trace_csv(trace, trace_prefix + std::to_string(i) + ".csv");
        terminal_S.push_back(trace.final_Shat());
        if (trace.final_Shat() > 0.0)
            normalized.push_back(trace.final_M() / std::sqrt(trace.final_Shat()));
        per_run.push_back({{"M", trace.final_M()},
                           {"Shat", trace.final_Shat()},
                           {"steps", trace.steps_total},
                           {"absorbed_at_y", sc.absorbed_at_y},
                           {"boundary_mass", sc.boundary_mass()},
                           {"accounting_gap",
                            std::abs(recompute_martingale(hf, sc) - trace.final_M())}});
    }

    json j{{"d", d},
           {"y", y_coords},
           {"k", k},
           {"P0", hf.p0},
           {"schedule", {{"kind", kind},
                         {"T0", sched.T0},
                         {"T1", sched.T1},
                         {"Q", sched.Q},
                         {"case", sched.which == ScheduleCase::near ? "near" : "far"}}},
           {"runs", per_run}};
    if (!terminal_S.empty()) {
        j["median_Shat"] = stats::median(terminal_S);
        j["p95_Shat"] = stats::percentile(terminal_S, 95.0);
    }
    if (normalized.size() >= 5) {
        const double ks = stats::ks_statistic_normal(normalized);
        j["ks_normalized_M"] = {{"D", ks}, {"pvalue", stats::ks_pvalue(ks, normalized.size())}};
    }
    emit(j, out);
    return 0;
}

int run_kernel(int d, std::vector<int> radii, int cap, const std::string& out_prefix) {
    if (radii.empty())
        for (int h = 2; h <= cap; h *= 2) radii.push_back(h);
    json j = json::array();
    for (const int h : radii) {
        const JumpKernel k = build_jump_kernel(d, h);
        const std::string path = out_prefix + std::to_string(h) + ".idlk";
        save_kernel(k, path);
        std::int64_t offsets = 0;
        for (const auto& o : k.orbits()) offsets += o.size;
        j.push_back({{"d", d}, {"h", h}, {"orbits", k.orbits().size()},
                     {"offsets", offsets}, {"file", path}});
    }
    emit(j, "");
    return 0;
}

int run_schedule(double T, double C) {
    const IterationSchedule sched = iteration_schedule(T, C);
    json j{{"T", sched.T},
           {"C", sched.C},
           {"K", sched.K},
           {"J", sched.J},
           {"m", sched.m},
           {"ell", sched.ell},
           {"ell_majorant", sched.ell_majorant},
           {"majorant_ok", sched.majorant_ok},
           {"terminal_bound", sched.terminal_bound},
           {"terminal_ok", sched.ell.back() <= sched.terminal_bound * 1.01}};
    emit(j, "");
    return 0;
}

int run_sweep(const std::string& config_path) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const SweepResult result = sweep(cfg);
    json j{{"radii", json::array()},
           {"exponent_median", result.exponent_median},
           {"exponent_max", result.exponent_max},
           {"runtime_s", result.runtime_s}};
    for (const auto& agg : result.by_radius)
        j["radii"].push_back({{"radius", agg.radius},
                              {"runs", agg.runs},
                              {"median_dev", agg.median_dev},
                              {"max_dev", agg.max_dev},
                              {"a_hat_median", agg.a_hat_median},
                              {"a_hat_max", agg.a_hat_max}});
    int failed = 0;
    for (const auto& row : result.rows) failed += row.failed ? 1 : 0;
    j["failed_runs"] = failed;
    emit(j, "");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"internal DLA simulation laboratory"};
    app.require_subcommand(1);

    // grow
    auto* grow_cmd = app.add_subcommand("grow", "grow one cluster");
    int g_d = 3;
    std::optional<double> g_r;
    std::optional<std::int64_t> g_t;
    std::uint64_t g_seed = 1;
    bool g_accel = false;
    int g_cap = 16;
    std::vector<std::string> g_cache;
    std::string g_snapshot, g_out;
    grow_cmd->add_option("--d", g_d, "dimension (>= 3)");
    grow_cmd->add_option("--r", g_r, "target radius; T = ceil(omega_d r^d)");
    grow_cmd->add_option("--t", g_t, "particle count");
    grow_cmd->add_option("--seed", g_seed, "master seed");
    grow_cmd->add_flag("--accel", g_accel, "enable jump-kernel acceleration");
    grow_cmd->add_option("--kernel-cap", g_cap, "largest kernel radius");
    grow_cmd->add_option("--kernel-cache", g_cache, "precomputed .idlk kernel files");
    grow_cmd->add_option("--snapshot-out", g_snapshot, "write a snapshot here");
    grow_cmd->add_option("--out", g_out, "write the JSON report here (default stdout)");

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "deviation scan of a snapshot");
    std::string s_snapshot, s_out;
    int s_m = 0, s_l = 0;
    scan_cmd->add_option("--snapshot", s_snapshot, "snapshot path")->required();
    scan_cmd->add_option("--m", s_m, "earliness margin (also tentacle m when >= 2)");
    scan_cmd->add_option("--l", s_l, "lateness margin for the count report");
    scan_cmd->add_option("--out", s_out, "JSON output path");

    // green
    auto* green_cmd = app.add_subcommand("green", "discrete Green function");
    int n_d = 3, n_R = 24;
    std::string n_csv, n_cache_out, n_cache_in;
    double n_rmin = 0.0, n_rmax = 0.0;
    green_cmd->add_option("--d", n_d, "dimension");
    green_cmd->add_option("--R", n_R, "box radius");
    green_cmd->add_option("--out", n_csv, "CSV export path");
    green_cmd->add_option("--cache-out", n_cache_out, "binary field cache to write");
    green_cmd->add_option("--cache-in", n_cache_in, "binary field cache to reuse");
    green_cmd->add_option("--uchiyama-rmin", n_rmin, "audit annulus inner radius");
    green_cmd->add_option("--uchiyama-rmax", n_rmax, "audit annulus outer radius");

    // harmonic
    auto* harm_cmd = app.add_subcommand("harmonic", "hitting probability P_{y,k}");
    std::vector<std::int64_t> h_y;
    int h_k = 1, h_m = 0;
    bool h_audit = false;
    std::string h_out;
    harm_cmd->add_option("--y", h_y, "target site, e.g. --y 8 0 0")->expected(3, kMaxDim)->required();
    harm_cmd->add_option("--k", h_k, "standoff distance");
    harm_cmd->add_flag("--audit", h_audit, "emit the inequality audit");
    harm_cmd->add_option("--m", h_m, "ball radius for the lower-bound audit (k=1)");
    harm_cmd->add_option("--out", h_out, "JSON output path");

    // sandpile
    auto* sand_cmd = app.add_subcommand("sandpile", "divisible sandpile weight");
    int p_d = 3;
    double p_r = 6.0;
    bool p_mvp = false;
    std::string p_csv;
    sand_cmd->add_option("--d", p_d, "dimension");
    sand_cmd->add_option("--r", p_r, "ball radius");
    sand_cmd->add_flag("--check-mvp", p_mvp, "verify the exact mean value property");
    sand_cmd->add_option("--out", p_csv, "CSV export path");

    // martingale
    auto* mart_cmd = app.add_subcommand("martingale", "growth martingale runs");
    std::vector<std::int64_t> m_y;
    int m_k = 1, m_runs = 30;
    std::string m_kind = "early", m_trace, m_out;
    double m_m = 2.0, m_l = 0.0;
    std::uint64_t m_seed = 1;
    mart_cmd->add_option("--y", m_y, "target site")->expected(3, kMaxDim)->required();
    mart_cmd->add_option("--k", m_k, "standoff distance");
    mart_cmd->add_option("--runs", m_runs, "independent runs");
    mart_cmd->add_option("--schedule", m_kind, "early|late");
    mart_cmd->add_option("--m", m_m, "earliness margin");
    mart_cmd->add_option("--l", m_l, "lateness margin");
    mart_cmd->add_option("--seed", m_seed, "master seed");
    mart_cmd->add_option("--trace-out", m_trace, "per-run trace CSV prefix");
    mart_cmd->add_option("--out", m_out, "summary JSON path");

    // kernel
    auto* kern_cmd = app.add_subcommand("kernel", "precompute jump-kernel caches");
    int k_d = 3, k_cap = 16;
    std::vector<int> k_radii;
    std::string k_prefix = "kernel_h";
    kern_cmd->add_option("--d", k_d, "dimension");
    kern_cmd->add_option("--radius", k_radii, "explicit kernel radii (default: powers of two)");
    kern_cmd->add_option("--cap", k_cap, "largest radius for the default ladder");
    kern_cmd->add_option("--out-prefix", k_prefix, "output prefix; files get <prefix><h>.idlk");

    // schedule
    auto* sched_cmd = app.add_subcommand("schedule", "deviation iteration schedule");
    double c_T = 1e6, c_C = 2.0;
    sched_cmd->add_option("--T", c_T, "particle count")->required();
    sched_cmd->add_option("--C", c_C, "lemma constant")->required();

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "seeded radius/seed sweep");
    std::string w_config;
    sweep_cmd->add_option("--config", w_config, "JSON config path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (grow_cmd->parsed())
            return run_grow(g_d, g_r, g_t, g_seed, g_accel, g_cap, g_cache, g_snapshot, g_out);
        if (scan_cmd->parsed()) return run_scan(s_snapshot, s_m, s_l, s_out);
        if (green_cmd->parsed())
            return run_green(n_d, n_R, n_csv, n_cache_out, n_cache_in, n_rmin, n_rmax);
        if (harm_cmd->parsed()) return run_harmonic(h_y, h_k, h_audit, h_m, h_out);
        if (sand_cmd->parsed()) return run_sandpile(p_d, p_r, p_mvp, p_csv);
        if (mart_cmd->parsed())
            return run_martingale_cmd(m_y, m_k, m_runs, m_kind, m_m, m_l, m_seed, m_trace, m_out);
        if (kern_cmd->parsed()) return run_kernel(k_d, k_radii, k_cap, k_prefix);
        if (sched_cmd->parsed()) return run_schedule(c_T, c_C);
        if (sweep_cmd->parsed()) return run_sweep(w_config);
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
