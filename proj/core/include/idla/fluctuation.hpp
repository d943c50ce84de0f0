#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "idla/cluster.hpp"

namespace idla {

/// m-early per the discretized predicate T(x) <= ceil(omega_d (|x|-m)^d).
bool is_early(const Cluster& c, const Site& x, double m);

/// ell-late: x in B_{(T/omega)^{1/d} - ell} with T(x) > floor(omega_d
/// (|x|+ell)^d), where unoccupied sites count as T(x) = infinity.
bool is_late(const Cluster& c, const Site& x, double ell);

/// Per-cluster sphericity statistics.
struct FluctuationReport {
    int d = 0;
    double r = 0.0;  // nominal radius (T / omega_d)^(1/d)
    std::int64_t T = 0;
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;
    double mT = 0.0;  // max over occupied x of (|x| - (T(x)/omega)^(1/d))_+
    double lT = 0.0;  // max inner lag, see is_late
    std::vector<std::int64_t> early_count;  // index m = 1..: #sites m-early
    std::vector<std::int64_t> late_count;   // index ell = 1..: #sites ell-late
    double runtime_s = 0.0;
};

FluctuationReport early_late_scan(const Cluster& c);

/// Thin-tentacle statistic: for every site z that was m-early on
/// arrival, the occupied fraction of B(z, m) at that moment.
struct TentacleReport {
    int m = 0;
    int early_sites = 0;
    bool any = false;
    double min_fraction = std::numeric_limits<double>::infinity();
    Site argmin;
};
TentacleReport tentacle_scan(const Cluster& c, int m);

/// The deviation-iteration schedule: m_0 = T, ell_j = max(C ((log T)
/// m_j)^(1/3), C sqrt(log T)), m_{j+1} = C ell_j, J = ceil(log T),
/// together with its majorant ell'_j and the terminal bound 2 sqrt(K),
/// K = C^4 log T.
struct IterationSchedule {
    double T = 0.0;
    double C = 0.0;
    double K = 0.0;
    int J = 0;
    std::vector<double> m;
    std::vector<double> ell;
    std::vector<double> ell_majorant;
    bool majorant_ok = false;
    double terminal_bound = 0.0;  // 2 sqrt(K)
};
IterationSchedule iteration_schedule(double T, double C);

struct ExperimentConfig {
    int d = 3;
    std::vector<double> radii;
    int seeds_per_radius = 1;
    bool acceleration = true;
    int kernel_cap = 16;
    std::vector<std::string> kernel_cache;  // .idlk files to reuse instead of building
    std::uint64_t master_seed = 1;
    int tentacle_m = 0;  // 0 disables the tentacle scan
    std::string out_csv;
    std::string out_json;
    std::string plot_data;  // optional scatter + reference-curve table
};

ExperimentConfig load_experiment_config(const std::string& path);

struct SweepRow {
    double radius = 0.0;
    int seed_index = 0;
    std::uint64_t stream_index = 0;
    bool failed = false;
    std::string error;
    FluctuationReport report;
    TentacleReport tentacle;
};

struct RadiusAggregate {
    double radius = 0.0;
    int runs = 0;
    double median_dev = 0.0;  // median of max(mT, lT)
    double max_dev = 0.0;
    double p95_dev = 0.0;
    double a_hat_median = 0.0;  // median_dev / sqrt(log r)
    double a_hat_max = 0.0;
    double a_hat_p95 = 0.0;
};

struct SweepResult {
    ExperimentConfig config;
    std::vector<SweepRow> rows;             // deterministic (radius, seed) order
    std::vector<RadiusAggregate> by_radius;
    double exponent_median = 0.0;  // slope of log median_dev vs log log r
    double exponent_max = 0.0;
    double runtime_s = 0.0;
};

/// Grow seeds x radii clusters in parallel (IDLA_THREADS workers), scan
/// each, aggregate, and optionally write CSV / JSON / plot data.  The
/// result is a pure function of (config contents, master_seed);
/// per-run failures are recorded and do not abort the sweep.
SweepResult sweep(const ExperimentConfig& cfg);

void write_sweep_csv(const SweepResult& result, const std::string& path);
void write_sweep_json(const SweepResult& result, const std::string& path);
void write_plot_data(const SweepResult& result, const std::string& path);

}  // namespace idla
