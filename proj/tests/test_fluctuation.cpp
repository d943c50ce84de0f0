#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "idla/engine.hpp"
#include "idla/fluctuation.hpp"

using namespace idla;

namespace {

const LatticeGeometry kGeom3(3);

// Cluster filled in radial arrival order: the most spherical history
// possible, with analytically known arrival times.
Cluster radial_fixture(double radius) {
    auto sites = discrete_ball(3, Site{}, radius);
    std::stable_sort(sites.begin(), sites.end(),
                     [](const Site& a, const Site& b) { return a.norm2() < b.norm2(); });
    Cluster c(kGeom3, RngStream(0, 0));
    std::int64_t t = 0;
    for (const auto& s : sites) c.add(s, ++t);
    return c;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("degenerate single-site cluster") {
    Cluster c(kGeom3, RngStream(0, 0));
    c.add(Site{}, 1);
    const FluctuationReport rpt = early_late_scan(c);
    CHECK(rpt.mT == 0.0);
    CHECK(rpt.lT == 0.0);
    CHECK(rpt.T == 1);

    Cluster empty(kGeom3, RngStream(0, 0));
    CHECK_THROWS_AS(early_late_scan(empty), ContractError);
}

TEST_CASE("radial fixture has sub-unit deviations") {
    const Cluster c = radial_fixture(12.0);
    const FluctuationReport rpt = early_late_scan(c);

    // scan agrees with the per-site formula evaluated directly
    const double wd = kGeom3.omega_d();
    double expect_m = 0.0;
    c.for_each_occupied([&](const Site& x, std::int64_t t) {
        expect_m = std::max(expect_m, x.norm() - std::cbrt(double(t) / wd));
    });
    CHECK(rpt.mT == doctest::Approx(expect_m).epsilon(1e-12));

    // a radially filled ball is almost exactly on schedule
    CHECK(rpt.mT <= 1.3);
    CHECK(rpt.lT <= 1.3);
}

TEST_CASE("early/late predicates are monotone and track the deviations") {
    const Cluster c = grow(kGeom3, 800, RngStream(42, 0));
    const FluctuationReport rpt = early_late_scan(c);
    const double wd = kGeom3.omega_d();

    c.for_each_occupied([&](const Site& x, std::int64_t t) {
        for (int m = 1; m <= 5; ++m) {
            if (is_early(c, x, m)) {
                CHECK((m == 1 || is_early(c, x, m - 1)));  // monotone in m
                // deviation exceeds m up to the one-particle slack
                const double slack =
                    std::cbrt(double(t) / wd) - std::cbrt(double(t - 1) / wd) + 1e-12;
                CHECK(x.norm() - std::cbrt(double(t) / wd) > m - slack);
                CHECK(rpt.mT > m - slack);
            }
        }
    });

    const double rT = std::cbrt(double(c.count()) / wd);
    for (const auto& x : discrete_ball(3, Site{}, rT)) {
        for (int ell = 1; ell <= 5; ++ell) {
            if (is_late(c, x, ell)) {
                CHECK((ell == 1 || is_late(c, x, ell - 1)));
                CHECK(rpt.lT >= ell - 1.0 - 1e-9);
            }
        }
    }

    // histogram consistency: early_count[m-1] counts the m-early sites
    if (!rpt.early_count.empty()) {
        std::int64_t direct = 0;
        c.for_each_occupied([&](const Site& x, std::int64_t) {
            if (is_early(c, x, 1.0)) ++direct;
        });
        CHECK(rpt.early_count[0] == direct);
    }
}

TEST_CASE("tentacle scan flags a thin protrusion and accepts dense bumps") {
    // dense ball + a 4-site filament sticking out along the axis
    Cluster c = radial_fixture(12.0);
    std::int64_t t = c.count();
    for (int i = 13; i <= 16; ++i) c.add(Site(i, 0, 0), ++t);

    const TentacleReport thin = tentacle_scan(c, 2);
    REQUIRE(thin.any);
    CHECK(thin.early_sites >= 1);
    CHECK(thin.min_fraction < 0.5);
    CHECK(thin.argmin[0] >= 13);

    // the same site surrounded by a solid half-ball cap is not thin:
    // the spec fixture value is about omega_d/2 (half-ball overlap)
    Cluster dense = radial_fixture(12.0);
    t = dense.count();
    std::vector<Site> cap;
    for (const auto& off : discrete_ball(3, Site{}, 4.0)) {
        const Site x = Site(12, 0, 0) + off;
        if (!dense.occupied(x)) cap.push_back(x);
    }
    std::stable_sort(cap.begin(), cap.end(),
                     [](const Site& a, const Site& b) { return a.norm2() < b.norm2(); });
    for (const auto& x : cap) dense.add(x, ++t);

    const TentacleReport bump = tentacle_scan(dense, 2);
    if (bump.any) {
        // fraction per m^d of a half ball is ~ omega_d/2 = 2.09
        CHECK(bump.min_fraction > 0.6);
        // exact agreement with a direct recount at the argmin
        std::int64_t direct = 0;
        const std::int64_t t_z = dense.arrival(bump.argmin);
        for (const auto& off : discrete_ball(3, Site{}, 2.0)) {
            const Site x = bump.argmin + off;
            if (dense.occupied(x) && dense.arrival(x) <= t_z) ++direct;
        }
        CHECK(bump.min_fraction == doctest::Approx(double(direct) / 8.0));
    }

    // no early sites -> empty report
    const TentacleReport none = tentacle_scan(radial_fixture(10.0), 3);
    CHECK_FALSE(none.any);
    CHECK(none.early_sites == 0);

    CHECK_THROWS_AS(tentacle_scan(c, 1), ContractError);
}

TEST_CASE("iteration schedule") {
    CHECK_THROWS_AS(iteration_schedule(2.0, 2.0), ContractError);
    CHECK_THROWS_AS(iteration_schedule(100.0, 0.5), ContractError);

    const IterationSchedule sched = iteration_schedule(1e6, 2.0);
    CHECK(sched.J == 14);
    CHECK(sched.K == doctest::Approx(16.0 * std::log(1e6)));

    // monotone contraction until the fixed-point regime
    bool contracted = true;
    for (std::size_t j = 0; j + 1 < sched.m.size(); ++j) {
        if (sched.m[j + 1] < sched.m[j])
            CHECK(contracted);  // once it stops shrinking it never shrinks again
        else
            contracted = false;
    }
    CHECK(sched.m[1] < sched.m[0]);

    CHECK(sched.majorant_ok);
    CHECK(sched.ell.back() <= sched.terminal_bound * 1.01);
    CHECK(sched.terminal_bound == doctest::Approx(2.0 * std::sqrt(sched.K)));
}

TEST_CASE("sweep: determinism, shapes, failure isolation") {
    ExperimentConfig cfg;
    cfg.d = 3;
    cfg.radii = {4.0, 6.0};
    cfg.seeds_per_radius = 3;
    cfg.acceleration = true;
    cfg.kernel_cap = 4;
    cfg.master_seed = 99;
    cfg.out_csv = "sweep_a.csv";

    const SweepResult a = sweep(cfg);
    CHECK(a.rows.size() == 6);
    CHECK(a.by_radius.size() == 2);
    for (const auto& row : a.rows) CHECK_FALSE(row.failed);
    for (const auto& agg : a.by_radius) CHECK(agg.runs == 3);

    cfg.out_csv = "sweep_b.csv";
    const SweepResult b = sweep(cfg);
    CHECK(slurp("sweep_a.csv") == slurp("sweep_b.csv"));

    // precomputed kernel caches reproduce the built-ladder runs exactly
    save_kernel(build_jump_kernel(3, 2), "cache_h2.idlk");
    save_kernel(build_jump_kernel(3, 4), "cache_h4.idlk");
    ExperimentConfig cached = cfg;
    cached.kernel_cache = {"cache_h2.idlk", "cache_h4.idlk"};
    cached.out_csv = "sweep_c.csv";
    sweep(cached);
    CHECK(slurp("sweep_a.csv") == slurp("sweep_c.csv"));
    std::remove("sweep_a.csv");
    std::remove("sweep_b.csv");
    std::remove("sweep_c.csv");
    std::remove("cache_h2.idlk");
    std::remove("cache_h4.idlk");

    // single radius, single seed: one row, no exponent fit
    ExperimentConfig single;
    single.radii = {5.0};
    single.seeds_per_radius = 1;
    single.acceleration = false;
    single.out_json = "single.json";
    single.plot_data = "single_plot.csv";
    const SweepResult s = sweep(single);
    CHECK(s.rows.size() == 1);
    CHECK(s.exponent_median == 0.0);
    CHECK(slurp("single.json").find("\"by_radius\"") != std::string::npos);
    CHECK(slurp("single_plot.csv").rfind("radius,max_dev,ref_sqrt_log,ref_log", 0) == 0);
    std::remove("single.json");
    std::remove("single_plot.csv");

    // per-run failures (tentacle_m = 1 violates the scan contract) are
    // isolated; the sweep still completes
    ExperimentConfig bad = single;
    bad.tentacle_m = 1;
    const SweepResult f = sweep(bad);
    CHECK(f.rows.size() == 1);
    CHECK(f.rows[0].failed);
    CHECK_FALSE(f.rows[0].error.empty());

    ExperimentConfig invalid;
    invalid.radii = {};
    CHECK_THROWS_AS(sweep(invalid), ContractError);
    invalid.radii = {1.0};
    CHECK_THROWS_AS(sweep(invalid), ContractError);
}

TEST_CASE("config file parsing") {
    const std::string path = "cfg.json";
    {
        std::ofstream out(path);
        out << R"({"d":3,"radii":[4,8],"seeds_per_radius":2,"acceleration":false,)"
            << R"("master_seed":7,"tentacle_m":2})";
    }
    const ExperimentConfig cfg = load_experiment_config(path);
    CHECK(cfg.d == 3);
    CHECK(cfg.radii == std::vector<double>{4.0, 8.0});
    CHECK(cfg.seeds_per_radius == 2);
    CHECK_FALSE(cfg.acceleration);
    CHECK(cfg.master_seed == 7);
    CHECK(cfg.tentacle_m == 2);
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_experiment_config("missing.json"), ContractError);
}
