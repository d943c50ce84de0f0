#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idla/cluster.hpp"
#include "idla/harmonic.hpp"
#include "idla/rng.hpp"

namespace idla {

/// Time series of the growth martingale M(t) = sum over the stopped
/// multiset cluster of (P(x) - P(0)) and its discrete quadratic
/// variation Shat(t) = sum over lattice steps of (delta P)^2.
struct MartingaleTrace {
    std::vector<std::int64_t> particle_steps;  // cumulative lattice steps when each particle stopped
    std::vector<double> M;                     // martingale value at that moment
    std::vector<double> Shat;                  // running quadratic variation
    std::int64_t steps_total = 0;

    double final_M() const { return M.empty() ? 0.0 : M.back(); }
    double final_Shat() const { return Shat.empty() ? 0.0 : Shat.back(); }
};

/// Run the stopped process for `particles` walkers, accumulating M and
/// Shat one lattice step at a time (never accelerated).  The P field
/// must have been solved for exactly this (y, k).  The finished stopped
/// cluster is returned through `out_cluster` when non-null.
MartingaleTrace run_martingale(const HarmonicField& field, const Site& y, int k,
                               std::int64_t particles, RngStream rng,
                               StoppedCluster* out_cluster = nullptr);

/// M recomputed from the final multiset, the terminal accounting
/// identity: interior sites contribute P(x) - P(0), each boundary stop
/// -P(0), each absorption at y contributes 1 - P(0).
double recompute_martingale(const HarmonicField& field, const StoppedCluster& sc);

enum class ScheduleKind { early_lemma, late_lemma };
enum class ScheduleCase { near, far };  // near: s < 2k, far: s >= 2k

/// Particle-count schedules of the two deviation lemmas.
///   early_lemma: T1 = ceil(omega_d (r - m)^d), k = 1, y at radius r + 2m
///   late_lemma:  T1 = floor(omega_d (s + ell)^d);
///                far case also sets T0 = floor(omega_d (s + k - 3m)^d),
///                clamped to 0 when s + k - 3m <= 0.
struct DiagnosticSchedule {
    ScheduleKind kind = ScheduleKind::early_lemma;
    ScheduleCase which = ScheduleCase::far;
    std::int64_t T0 = 0;
    std::int64_t T1 = 0;
    double Q = 0.0;  // T1 * P(0), filled when p0 is supplied
    double s = 0.0;
    int k = 1;
    double m = 0.0;
    double ell = 0.0;
};

struct ScheduleParams {
    double radius = 0.0;  // r = |z| for early_lemma, s = |y| for late_lemma
    double m = 0.0;
    double ell = 0.0;
    int k = 1;
    double p0 = 0.0;  // optional, enables Q
};

DiagnosticSchedule schedule(ScheduleKind kind, const LatticeGeometry& geom,
                            const ScheduleParams& params);

/// Quadratic-variation summary across radii.
struct QvGroup {
    double s = 0.0;
    std::vector<double> shat_final;  // Shat(T1) per run
};
struct QvSummary {
    struct Row {
        double s = 0.0;
        int runs = 0;
        double median = 0.0;
        double p95 = 0.0;
    };
    std::vector<Row> rows;                    // sorted by s
    std::vector<double> consecutive_ratios;   // median(s_{i+1}) / median(s_i)
    bool growth_flag = false;                 // medians strictly grow across >= 3 radii
};
QvSummary qv_summary(std::vector<QvGroup> groups);

/// CSV export: particle_index,t,M,Shat (t = cumulative lattice steps).
void write_trace_csv(const MartingaleTrace& trace, const std::string& path);

}  // namespace idla
