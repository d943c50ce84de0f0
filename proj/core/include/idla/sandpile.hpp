#pragma once

#include "idla/grid_function.hpp"
#include "idla/lattice.hpp"

namespace idla {

enum class ToppleOrder { parallel, lex, reverse_lex };

/// Divisible-sandpile mass profile started from omega_d r^d at the
/// origin: sites with mass above 1 keep 1 and split the excess equally
/// among their 2d neighbors, until the largest excess drops below the
/// threshold.  The result is the weight w_r with the exact mean value
/// property for discrete harmonic functions.
struct SandpileWeight {
    int d = 0;
    double r = 0.0;
    double initial_mass = 0.0;
    GridFunction w;
    double c_inner = 0.0;     // largest c with w = 1 on B_{r-c} (fitted)
    double final_excess = 0.0;
    std::int64_t sweeps = 0;
    double mass_drift = 0.0;  // |sum w - initial mass|
};

SandpileWeight divisible_sandpile(int d, double r,
                                  ToppleOrder order = ToppleOrder::parallel,
                                  double threshold = 1e-12);

/// sum_x w(x) (u(x) - u(0)) together with its a-priori bound
/// (final excess) x (sum_x |u(x) - u(0)| over the support).  u must be
/// defined on the support of w and discrete harmonic there.
struct MeanValueCheck {
    double residual = 0.0;
    double bound = 0.0;
};
MeanValueCheck mean_value_residual(const SandpileWeight& sw, const GridFunction& u);

}  // namespace idla
