#pragma once

#include <optional>

#include "idla/grid_function.hpp"
#include "idla/lattice.hpp"

namespace idla {

/// Domain of the hitting-probability problem: lattice sites of
/// B_{s+k} minus {y}, absorbed at y (value 1) or at the first site
/// outside B_{s+k} (value 0), with s = |y|.
struct HarmonicDomain {
    Site y;
    double s = 0.0;
    int k = 0;
    double outer_radius() const { return s + k; }
};

/// P = P_{y,k}: probability that the walk from x reaches y before
/// leaving B_{s+k}; discrete harmonic at every interior site.
struct HarmonicField {
    int d = 0;
    HarmonicDomain domain;
    GridFunction P;  // interior + y + absorbing shell sites
    double residual = 0.0;
    double p0 = 0.0;  // P(0)

    double at(const Site& x) const { return P.at(x); }
};

/// Dirichlet solve to residual < 1e-10 (red-black SOR, deterministic
/// sweep order).
HarmonicField solve_P(int d, const Site& y, int k);

/// Smallest empirical constants for the pointwise upper bounds:
///   (a)  P(x) <= C / (1 + |x-y|^(d-2))
///   (b)  P(x) <= C k (s+k+1-|x|) / |x-y|^d      on |x-y| >= k/2
///   (c)  max_{B_r} P <= C k / (s-r-k)^(d-1)     for r < s-2k
/// (b) is reported both on its stated range and on |x-y| >= 2k, where
/// its derivation starts.
struct UpperAuditReport {
    double C_a = 0.0;
    double C_b_stated = 0.0;
    double C_b_wide = 0.0;  // range |x-y| >= 2k
    std::optional<double> C_c;
};
UpperAuditReport audit_upper(const HarmonicField& hf);

/// Largest empirical constants for the lower bounds:
///   (a)  P(0) >= c k / s^(d-1)
///   (b)  min_{B(z,m)} P >= c / m^(d-1),  z = (1 - 2m/s) y,  k = 1 only
struct LowerAuditReport {
    double c_a = 0.0;
    std::optional<double> c_b;
    int m = 0;
};
LowerAuditReport audit_lower(const HarmonicField& hf, int m);

/// Normalized shell and ball sums:
///   (a)  max_{r <= s+k}  sum_{B_{r+1} \ B_r} P / k
///   (b)  max_{r <= s}    |sum_{B_r} (P - P(0))| / k
///   (c)  |sum_{B_{s+k}} (P - P(0))| / k^2
struct ShellSumReport {
    double shell_over_k = 0.0;
    double ball_over_k = 0.0;
    double full_ball_over_k2 = 0.0;
};
ShellSumReport shell_sums(const HarmonicField& hf);

}  // namespace idla
