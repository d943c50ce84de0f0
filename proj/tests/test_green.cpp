#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "helpers/oracles.hpp"
#include "idla/green.hpp"
#include "idla/rng.hpp"
#include "idla/symmetry.hpp"

using namespace idla;

namespace {
// Watson's integral: expected visits to the origin for d = 3
constexpr double kWatsonG0 = 1.5163860591519780;
}  // namespace

TEST_CASE("reference evaluation: Watson constant and exact neighbor identity") {
    GreenReference ref(3, 8);
    CHECK(ref(Site{}) == doctest::Approx(kWatsonG0).epsilon(1e-9));
    // avg of the 6 (equal) neighbor values minus g(0) is -1, so
    // g(e1) = g(0) - 1 exactly
    CHECK(ref(Site(1, 0, 0)) == doctest::Approx(kWatsonG0 - 1.0).epsilon(1e-9));
}

TEST_CASE("reference values are discrete harmonic away from the origin") {
    GreenReference ref(3, 9);
    for (const Site x : {Site(2, 1, 0), Site(3, -2, 1), Site(5, 0, 0), Site(4, 4, 4)}) {
        double nbr_sum = 0.0;
        for (const auto& n : oracle::neighbors(3, x)) nbr_sum += ref(n);
        CHECK(std::abs(nbr_sum / 6.0 - ref(x)) < 1e-9);
    }
    // and carries the unit defect at the origin
    double nbr_sum = 0.0;
    for (const auto& n : oracle::neighbors(3, Site{})) nbr_sum += ref(n);
    CHECK(nbr_sum / 6.0 - ref(Site{}) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("solved field: residual, symmetry, decay, Watson value") {
    const GreenField gf = compute_green(3, 16);
    CHECK(gf.residual < 1e-10);
    CHECK(gf.at(Site{}) == doctest::Approx(kWatsonG0).epsilon(1e-8));

    // positivity and maximum at the origin
    double gmax = 0.0;
    for (std::int64_t i = 0; i < gf.g.box().size(); ++i) {
        CHECK(gf.g.raw(i) > 0.0);
        gmax = std::max(gmax, gf.g.raw(i));
    }
    CHECK(gmax == gf.at(Site{}));

    // lattice symmetry
    for (const Site x : {Site(3, 1, 0), Site(2, 2, 1), Site(7, -4, 2)}) {
        const double v = gf.at(x);
        for (const auto& image : symmetry::orbit(3, x)) CHECK(gf.at(image) == doctest::Approx(v).epsilon(1e-10));
    }

    // monotone radial decay on the axis
    for (int n = 1; n < 16; ++n)
        CHECK(gf.at(Site(n + 1, 0, 0)) < gf.at(Site(n, 0, 0)));

    // interior harmonicity at a spot away from 0
    const Site x(4, 2, -3);
    double nbr = 0.0;
    for (const auto& nb : oracle::neighbors(3, x)) nbr += gf.at(nb);
    CHECK(std::abs(nbr / 6.0 - gf.at(x)) < 1e-10);
}

TEST_CASE("a_d regression stays within 1% of the closed form") {
    const GreenField gf = compute_green(3, 24);
    CHECK(gf.a_fit == doctest::Approx(3.0 / (2.0 * M_PI)).epsilon(0.01));
}

TEST_CASE("d=4 small field solves and fits") {
    const GreenField gf = compute_green(4, 8);
    CHECK(gf.residual < 1e-10);
    CHECK(gf.a_d == doctest::Approx(2.0 / (2.0 * omega(4))).epsilon(1e-12));
    // harmonicity spot check
    const Site x = [] {
        Site s;
        s[0] = 2;
        s[1] = 1;
        return s;
    }();
    double nbr = 0.0;
    for (const auto& nb : oracle::neighbors(4, x)) nbr += gf.at(nb);
    CHECK(std::abs(nbr / 8.0 - gf.at(x)) < 1e-10);
}

TEST_CASE("uchiyama residual audit") {
    const GreenField gf = compute_green(3, 20);
    const double u = uchiyama_residual(gf, 4.0, 10.0);
    CHECK(u > 0.0);
    CHECK(u < 10.0);

    // axis vs diagonal at comparable |x| both obey the same bound
    const double r = 8.0;
    const double axis_err = std::abs(gf.at(Site(8, 0, 0)) - gf.a_d / 8.0) * std::pow(8.0, 3);
    const Site diag(5, 5, 3);  // |x| = 7.68
    const double dn = diag.norm();
    const double diag_err = std::abs(gf.at(diag) - gf.a_d / dn) * std::pow(dn, 3);
    CHECK(axis_err <= u + 1e-12);
    CHECK(diag_err <= uchiyama_residual(gf, 7.0, 8.0) + 1e-12);
    (void)r;

    CHECK_THROWS_AS(uchiyama_residual(gf, 10.3, 10.4), ContractError);  // empty shell
    CHECK_THROWS_AS(uchiyama_residual(gf, 4.0, 11.0), ContractError);   // beyond R/2
    CHECK_THROWS_AS(uchiyama_residual(gf, 0.0, 5.0), ContractError);
}

TEST_CASE("harmonic measure of a level set") {
    const GreenField gf = compute_green(3, 24);
    const double target_radius = 8.3;
    const double alpha = gf.a_d / target_radius;
    const HarmonicMeasure hm = harmonic_measure_levelset(gf, alpha);

    CHECK(std::abs(hm.sum_p - 1.0) < 1e-8);
    CHECK(hm.orbit_count >= 3);
    for (const auto& bp : hm.boundary) {
        CHECK(bp.p > 0.0);
        CHECK(bp.frac >= 0.0);
        CHECK(bp.frac <= 1.0);
        // boundary stays within the safety margin of the target sphere
        const double r_in = bp.inside.norm();
        const double r_out = bp.outside.norm();
        CHECK(std::min(r_in, r_out) > target_radius - 2.0);
        CHECK(std::max(r_in, r_out) < target_radius + 2.0);
    }

    // p constant on symmetry orbits
    std::map<std::size_t, double> orbit_value;
    for (const auto& bp : hm.boundary) {
        const auto it = orbit_value.find(bp.orbit);
        if (it == orbit_value.end())
            orbit_value[bp.orbit] = bp.p;
        else
            CHECK(bp.p == doctest::Approx(it->second).epsilon(1e-9));
    }

    // error paths
    CHECK_THROWS_AS(harmonic_measure_levelset(gf, gf.at(Site(5, 0, 0))), ContractError);
    CHECK_THROWS_AS(harmonic_measure_levelset(gf, gf.a_d / 40.0), ContractError);
    CHECK_THROWS_AS(harmonic_measure_levelset(gf, 2.0 * gf.at(Site{})), ContractError);
}

TEST_CASE("harmonic measure agrees with grid Brownian motion (small)") {
    const GreenField gf = compute_green(3, 20);
    const double alpha = gf.a_d / 6.3;
    const HarmonicMeasure hm = harmonic_measure_levelset(gf, alpha);

    // star-graph refinement walker: from a lattice site the exit point
    // along each incident edge absorbs with probability proportional to
    // 1/length; boundary crossings use the interpolated crossing point
    std::map<Site, std::map<int, double>> crossing;  // site -> (edge id -> frac)
    for (const auto& bp : hm.boundary) {
        int axis = 0, dir = 0;
        for (int i = 0; i < 3; ++i) {
            const int delta = bp.outside[i] - bp.inside[i];
            if (delta != 0) {
                axis = i;
                dir = delta;
            }
        }
        crossing[bp.inside][axis * 2 + (dir > 0 ? 1 : 0)] = bp.frac;
    }

    std::map<std::size_t, std::int64_t> orbit_hits;
    std::map<std::size_t, double> orbit_prob;
    std::map<Site, std::map<int, std::size_t>> edge_orbit;
    for (const auto& bp : hm.boundary) {
        orbit_prob[bp.orbit] += bp.p;
        int axis = 0, dir = 0;
        for (int i = 0; i < 3; ++i) {
            const int delta = bp.outside[i] - bp.inside[i];
            if (delta != 0) {
                axis = i;
                dir = delta;
            }
        }
        edge_orbit[bp.inside][axis * 2 + (dir > 0 ? 1 : 0)] = bp.orbit;
    }

    RngStream rng(2024, 0);
    const int walks = 200000;
    for (int i = 0; i < walks; ++i) {
        Site x{};
        while (true) {
            const auto it = crossing.find(x);
            if (it == crossing.end()) {
                oracle::naive_step(3, rng, x);
                continue;
            }
            // star sample: conductance 1/length per incident leaf
            double weights[6];
            double total = 0.0;
            for (int e = 0; e < 6; ++e) {
                const auto ce = it->second.find(e);
                weights[e] = ce == it->second.end() ? 1.0 : 1.0 / ce->second;
                total += weights[e];
            }
            double u = rng.next_double() * total;
            int chosen = 0;
            for (; chosen < 5; ++chosen) {
                u -= weights[chosen];
                if (u < 0.0) break;
            }
            if (it->second.count(chosen)) {
                ++orbit_hits[edge_orbit[x][chosen]];
                break;
            }
            x[chosen / 2] += (chosen % 2) ? 1 : -1;
        }
    }

    for (const auto& [orbit, p] : orbit_prob) {
        const double sigma = std::sqrt(walks * p * (1.0 - p));
        CHECK(std::abs(double(orbit_hits[orbit]) - walks * p) <= 4.0 * sigma + 1.0);
    }
}

TEST_CASE("field cache round trip") {
    const GreenField gf = compute_green(3, 8);
    const std::string path = "green_r8.idlg";
    save_green(gf, path);
    const GreenField loaded = load_green(path);
    CHECK(loaded.d == gf.d);
    CHECK(loaded.R == gf.R);
    CHECK(loaded.a_d == gf.a_d);
    for (std::int64_t i = 0; i < gf.g.box().size(); ++i)
        CHECK(loaded.g.raw(i) == gf.g.raw(i));
    std::remove(path.c_str());
}
