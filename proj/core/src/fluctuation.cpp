#include "idla/fluctuation.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "idla/engine.hpp"
#include "idla/parallel.hpp"
#include "idla/stats.hpp"

namespace idla {

namespace {

double nominal_radius(const Cluster& c) {
    return std::pow(double(c.count()) / c.geometry().omega_d(), 1.0 / c.geometry().dim());
}

}  // namespace

bool is_early(const Cluster& c, const Site& x, double m) {
    if (!c.occupied(x)) return false;
    const double base = x.norm() - m;
    if (base <= 0.0) return false;
    const double threshold = std::ceil(c.geometry().omega_d() * std::pow(base, c.geometry().dim()));
    return double(c.arrival(x)) <= threshold;
}

bool is_late(const Cluster& c, const Site& x, double ell) {
    const double rT = nominal_radius(c);
    if (x.norm() > rT - ell + Ball::kTie) return false;  // outside the candidate ball
    if (!c.occupied(x)) return true;
    const double threshold =
        std::floor(c.geometry().omega_d() * std::pow(x.norm() + ell, c.geometry().dim()));
    return double(c.arrival(x)) > threshold;
}

FluctuationReport early_late_scan(const Cluster& c) {
    if (c.count() == 0) throw ContractError("early_late_scan: empty cluster has no arrival data");

    const LatticeGeometry& geom = c.geometry();
    const double wd = geom.omega_d();
    const double inv_d = 1.0 / geom.dim();
    const double T = double(c.count());
    const double rT = std::pow(T / wd, inv_d);

    FluctuationReport rpt;
    rpt.d = geom.dim();
    rpt.T = c.count();
    rpt.r = rT;
    rpt.master_seed = c.rng().master_seed();
    rpt.stream_index = c.rng().stream_index();

    // outer statistic over occupied sites
    c.for_each_occupied([&](const Site& x, std::int64_t t) {
        const double dev = x.norm() - std::pow(double(t) / wd, inv_d);
        rpt.mT = std::max(rpt.mT, dev);
    });
    rpt.mT = std::max(rpt.mT, 0.0);

    // inner statistic over the candidate ball; unoccupied sites are
    // late for every ell up to their distance below the nominal radius.
    // Occupied sites use arrival - 1: the schedule time strictly before
    // the site joined, so lateness is never manufactured by rounding.
    const BoxIndex& box = c.box();
    for (std::int64_t i = 0; i < box.size(); ++i) {
        const Site x = box.site(i);
        const double r = x.norm();
        if (r > rT) continue;
        double lag;
        if (c.occupied_flat(box.flat(x)))
            lag = std::pow(double(c.arrival(x) - 1) / wd, inv_d) - r;
        else
            lag = rT - r;
        rpt.lT = std::max(rpt.lT, lag);
    }
    rpt.lT = std::max(rpt.lT, 0.0);
    if (rpt.mT > T)
        throw SolverError("early_late_scan: mT exceeds T, cluster outside B_T");

    // predicate histograms at integer margins
    const int m_cap = int(std::ceil(rpt.mT)) + 1;
    const int l_cap = int(std::ceil(rpt.lT)) + 1;
    rpt.early_count.assign(std::size_t(m_cap), 0);
    rpt.late_count.assign(std::size_t(l_cap), 0);
    c.for_each_occupied([&](const Site& x, std::int64_t) {
        for (int m = 1; m <= m_cap; ++m) {
            if (!is_early(c, x, m)) break;
            ++rpt.early_count[std::size_t(m - 1)];
        }
    });
    for (std::int64_t i = 0; i < box.size(); ++i) {
        const Site x = box.site(i);
        if (x.norm() > rT) continue;
        for (int ell = 1; ell <= l_cap; ++ell) {
            if (!is_late(c, x, ell)) break;
            ++rpt.late_count[std::size_t(ell - 1)];
        }
    }
    return rpt;
}

TentacleReport tentacle_scan(const Cluster& c, int m) {
    if (m < 2) throw ContractError("tentacle_scan: m >= 2 required");
    TentacleReport rpt;
    rpt.m = m;

    const int d = c.geometry().dim();
    const auto offsets = discrete_ball(d, Site{}, double(m));
    const double md = std::pow(double(m), d);

    c.for_each_occupied([&](const Site& z, std::int64_t t_z) {
        if (!is_early(c, z, double(m))) return;
        ++rpt.early_sites;
        std::int64_t inside = 0;
        for (const auto& off : offsets) {
            const Site x = z + off;
            if (c.occupied(x) && c.arrival(x) <= t_z) ++inside;
        }
        const double frac = double(inside) / md;
        if (frac < rpt.min_fraction) {
            rpt.min_fraction = frac;
            rpt.argmin = z;
        }
        rpt.any = true;
    });
    return rpt;
}

IterationSchedule iteration_schedule(double T, double C) {
    if (!(T > M_E)) throw ContractError("iteration_schedule: T > e required");
    if (!(C >= 1.0)) throw ContractError("iteration_schedule: C >= 1 required");

    IterationSchedule sched;
    sched.T = T;
    sched.C = C;
    const double logT = std::log(T);
    sched.K = std::pow(C, 4.0) * logT;
    sched.J = int(std::ceil(logT));
    sched.terminal_bound = 2.0 * std::sqrt(sched.K);

    sched.m.push_back(T);
    for (int j = 0; j <= sched.J; ++j) {
        const double ell = std::max(C * std::cbrt(logT * sched.m.back()), C * std::sqrt(logT));
        sched.ell.push_back(ell);
        sched.m.push_back(C * ell);
    }
    sched.ell_majorant.push_back(std::cbrt(sched.K * T));
    for (int j = 0; j < sched.J; ++j) {
        const double prev = sched.ell_majorant.back();
        sched.ell_majorant.push_back(std::max(std::cbrt(sched.K * prev), std::sqrt(sched.K)));
    }
    sched.majorant_ok = true;
    for (std::size_t j = 0; j < sched.ell_majorant.size(); ++j)
        sched.majorant_ok =
            sched.majorant_ok && sched.ell[j] <= sched.ell_majorant[j] * (1.0 + 1e-9);
    return sched;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("load_experiment_config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ContractError("load_experiment_config: " + std::string(e.what()));
    }
    ExperimentConfig cfg;
    cfg.d = j.value("d", 3);
    if (j.contains("radii")) cfg.radii = j.at("radii").get<std::vector<double>>();
    cfg.seeds_per_radius = j.value("seeds_per_radius", 1);
    cfg.acceleration = j.value("acceleration", true);
    cfg.kernel_cap = j.value("kernel_cap", 16);
    if (j.contains("kernel_cache"))
        cfg.kernel_cache = j.at("kernel_cache").get<std::vector<std::string>>();
    cfg.master_seed = j.value("master_seed", std::uint64_t(1));
    cfg.tentacle_m = j.value("tentacle_m", 0);
    cfg.out_csv = j.value("out_csv", std::string{});
    cfg.out_json = j.value("out_json", std::string{});
    cfg.plot_data = j.value("plot_data", std::string{});
    return cfg;
}

SweepResult sweep(const ExperimentConfig& cfg) {
    LatticeGeometry geom(cfg.d);
    if (cfg.radii.empty()) throw ContractError("sweep: no radii configured");
    for (const double r : cfg.radii)
        if (!(r >= 2.0)) throw ContractError("sweep: radii must be >= 2");
    if (cfg.seeds_per_radius < 1) throw ContractError("sweep: seeds_per_radius >= 1 required");

    const auto t_start = std::chrono::steady_clock::now();

    std::vector<JumpKernel> kernels;
    if (!cfg.kernel_cache.empty()) {
        for (const auto& path : cfg.kernel_cache) {
            kernels.push_back(load_kernel(path));
            if (kernels.back().dim() != cfg.d)
                throw ContractError("sweep: cached kernel " + path + " has the wrong dimension");
        }
    } else if (cfg.acceleration) {
        kernels = build_kernel_ladder(cfg.d, cfg.kernel_cap);
    }

    SweepResult result;
    result.config = cfg;
    const std::size_t n_jobs = cfg.radii.size() * std::size_t(cfg.seeds_per_radius);
    result.rows.resize(n_jobs);

    parallel_for(n_jobs, [&](std::size_t job) {
        const std::size_t radius_i = job / std::size_t(cfg.seeds_per_radius);
        const int seed_i = int(job % std::size_t(cfg.seeds_per_radius));
        SweepRow& row = result.rows[job];
        row.radius = cfg.radii[radius_i];
        row.seed_index = seed_i;
        row.stream_index = std::uint64_t(job);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto particles =
                std::int64_t(std::ceil(geom.omega_d() * std::pow(row.radius, cfg.d)));
            Cluster c = grow(geom, particles, RngStream(cfg.master_seed, row.stream_index),
                             kernels.empty() ? nullptr : &kernels);
            row.report = early_late_scan(c);
            if (cfg.tentacle_m != 0) row.tentacle = tentacle_scan(c, cfg.tentacle_m);
            row.report.runtime_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
    });

    // per-radius aggregates and the scaling fits
    std::vector<double> log_log_r, log_median, log_max;
    for (std::size_t radius_i = 0; radius_i < cfg.radii.size(); ++radius_i) {
        RadiusAggregate agg;
        agg.radius = cfg.radii[radius_i];
        std::vector<double> devs;
        for (int seed_i = 0; seed_i < cfg.seeds_per_radius; ++seed_i) {
            const SweepRow& row = result.rows[radius_i * std::size_t(cfg.seeds_per_radius) +
                                              std::size_t(seed_i)];
            if (row.failed) continue;
            devs.push_back(std::max(row.report.mT, row.report.lT));
        }
        if (!devs.empty()) {
            agg.runs = int(devs.size());
            agg.median_dev = stats::median(devs);
            agg.max_dev = *std::max_element(devs.begin(), devs.end());
            agg.p95_dev = stats::percentile(devs, 95.0);
            const double sqrt_log_r = std::sqrt(std::log(agg.radius));
            agg.a_hat_median = agg.median_dev / sqrt_log_r;
            agg.a_hat_max = agg.max_dev / sqrt_log_r;
            agg.a_hat_p95 = agg.p95_dev / sqrt_log_r;
            if (agg.radius > 1.0) {
                log_log_r.push_back(std::log(std::log(agg.radius)));
                log_median.push_back(std::log(std::max(agg.median_dev, 1e-3)));
                log_max.push_back(std::log(std::max(agg.max_dev, 1e-3)));
            }
        }
        result.by_radius.push_back(agg);
    }
    if (log_log_r.size() >= 2) {
        result.exponent_median = stats::linear_fit(log_log_r, log_median).slope;
        result.exponent_max = stats::linear_fit(log_log_r, log_max).slope;
    }
    result.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (!cfg.out_csv.empty()) write_sweep_csv(result, cfg.out_csv);
    if (!cfg.out_json.empty()) write_sweep_json(result, cfg.out_json);
    if (!cfg.plot_data.empty()) write_plot_data(result, cfg.plot_data);
    return result;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ContractError("write_sweep_csv: cannot open " + path);
    std::fprintf(fp, "d,radius,T,seed_index,stream_index,mT,lT,max_dev,tentacle_min_fraction,status\n");
    for (const auto& row : result.rows) {
        if (row.failed) {
            std::fprintf(fp, "%d,%.17g,0,%d,%" PRIu64 ",nan,nan,nan,nan,failed\n",
                         result.config.d, row.radius, row.seed_index, row.stream_index);
            continue;
        }
        std::fprintf(fp, "%d,%.17g,%" PRId64 ",%d,%" PRIu64 ",%.17g,%.17g,%.17g,%.17g,ok\n",
                     result.config.d, row.radius, row.report.T, row.seed_index,
                     row.stream_index, row.report.mT, row.report.lT,
                     std::max(row.report.mT, row.report.lT),
                     row.tentacle.any ? row.tentacle.min_fraction : std::nan(""));
    }
    std::fclose(fp);
}

void write_sweep_json(const SweepResult& result, const std::string& path) {
    nlohmann::json j;
    j["config"] = {{"d", result.config.d},
                   {"radii", result.config.radii},
                   {"seeds_per_radius", result.config.seeds_per_radius},
                   {"acceleration", result.config.acceleration},
                   {"kernel_cap", result.config.kernel_cap},
                   {"kernel_cache", result.config.kernel_cache},
                   {"master_seed", result.config.master_seed},
                   {"tentacle_m", result.config.tentacle_m}};
    j["by_radius"] = nlohmann::json::array();
    for (const auto& agg : result.by_radius) {
        j["by_radius"].push_back({{"radius", agg.radius},
                                  {"runs", agg.runs},
                                  {"median_dev", agg.median_dev},
                                  {"max_dev", agg.max_dev},
                                  {"p95_dev", agg.p95_dev},
                                  {"a_hat_median", agg.a_hat_median},
                                  {"a_hat_max", agg.a_hat_max},
                                  {"a_hat_p95", agg.a_hat_p95}});
    }
    j["exponent_median"] = result.exponent_median;
    j["exponent_max"] = result.exponent_max;
    j["runtime_s"] = result.runtime_s;
    std::ofstream out(path);
    if (!out) throw ContractError("write_sweep_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

void write_plot_data(const SweepResult& result, const std::string& path) {
    // scatter of per-run deviations with sqrt(log r) and log r
    // reference curves scaled to the smallest-radius median
    double c_sqrt = 1.0, c_log = 1.0;
    if (!result.by_radius.empty() && result.by_radius.front().runs > 0) {
        const auto& first = result.by_radius.front();
        c_sqrt = first.median_dev / std::sqrt(std::log(first.radius));
        c_log = first.median_dev / std::log(first.radius);
    }
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ContractError("write_plot_data: cannot open " + path);
    std::fprintf(fp, "radius,max_dev,ref_sqrt_log,ref_log\n");
    for (const auto& row : result.rows) {
        if (row.failed) continue;
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g\n", row.radius,
                     std::max(row.report.mT, row.report.lT),
                     c_sqrt * std::sqrt(std::log(row.radius)), c_log * std::log(row.radius));
    }
    std::fclose(fp);
}

}  // namespace idla
