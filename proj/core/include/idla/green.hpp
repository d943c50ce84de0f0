#pragma once

#include <string>
#include <vector>

#include "idla/grid_function.hpp"
#include "idla/lattice.hpp"

namespace idla {

/// Discrete Green function g of the simple random walk on Z^d (d >= 3):
/// expected number of visits to x starting from the origin.  Satisfies
/// (mean of neighbors of x) - g(x) = -delta_0(x).
struct GreenField {
    GridFunction g;    // defined on the whole cube [-R, R]^d
    int d = 0;
    int R = 0;
    double a_d = 0.0;  // 2 / ((d-2) omega_d)
    double residual = 0.0;
    double a_fit = 0.0;  // regression of g(x) |x|^(d-2) over the calibration annulus

    double at(const Site& x) const { return g.at(x); }
};

/// Pointwise evaluation of g from the Bessel-product integral
///   g(x) = integral_0^inf prod_j e^{-t/d} I_{x_j}(t/d) dt,
/// accurate to ~1e-10.  Used for exact boundary values and as a
/// reference in tests.  Coordinates must satisfy |x_j| <= n_max.
class GreenReference {
public:
    GreenReference(int d, int n_max);
    double operator()(const Site& x) const;

private:
    int d_;
    int n_max_;
    std::vector<double> weights_;  // quadrature weight per node
    std::vector<double> table_;    // node-major: scaled I_n(t/d), n = 0..n_max
    double tail_t0_ = 0.0;         // analytic tail starts here
};

/// Solve for g on [-R, R]^d: exact boundary values from GreenReference,
/// red-black SOR in the interior to residual < 1e-10 (typically 1e-12).
/// The a_d cross-validation (fit vs closed form within 2%) runs
/// whenever the box is large enough to carry the calibration annulus.
GreenField compute_green(int d, int R);

/// max over r_min <= |x| <= r_max of |g(x) - a_d |x|^(2-d)| * |x|^d,
/// the empirical constant of the Green asymptotic error bound.
double uchiyama_residual(const GreenField& gf, double r_min, double r_max);

/// A point of the grid-level-set boundary of U = {g > alpha}: on the
/// edge from `inside` (in U) to `outside`, at distance `frac` from
/// `inside`; exit probability p for grid Brownian motion from 0.
struct LevelSetBoundaryPoint {
    Site inside;
    Site outside;
    double frac = 0.0;
    double p = 0.0;
    std::size_t orbit = 0;  // symmetry-orbit id within this measure
};

struct HarmonicMeasure {
    double alpha = 0.0;
    std::vector<LevelSetBoundaryPoint> boundary;
    double sum_p = 0.0;  // before normalization checks; should be 1
    std::size_t orbit_count = 0;
};

/// Harmonic measure of the level set U = {x in grid : g(x) > alpha}
/// seen from the origin, computed as the slope of g/2d along the
/// inward edge at every boundary point.  alpha must miss all lattice
/// values of g and U must close inside the solved box.
HarmonicMeasure harmonic_measure_levelset(const GreenField& gf, double alpha);

/// Field cache (magic "IDLG").
void save_green(const GreenField& gf, const std::string& path);
GreenField load_green(const std::string& path);

}  // namespace idla
