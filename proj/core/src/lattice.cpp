#include "idla/lattice.hpp"

#include <cmath>
#include <string>

namespace idla {

double omega(int d) {
    if (d <= 0) throw ContractError("omega: dimension must be positive, got " + std::to_string(d));
    return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

LatticeGeometry::LatticeGeometry(int d) : d_(d), omega_d_(0.0) {
    if (d < 3) throw ContractError("LatticeGeometry: d >= 3 required, got " + std::to_string(d));
    if (d > kMaxDim) throw ContractError("LatticeGeometry: d <= " + std::to_string(kMaxDim) + " supported");
    omega_d_ = omega(d);
}

double LatticeGeometry::green_constant() const {
    return 2.0 / ((d_ - 2) * omega_d_);
}

std::vector<Site> discrete_ball(int d, const Site& center, double r) {
    std::vector<Site> out;
    if (!(r >= 0.0)) return out;
    const Ball ball{center, r};
    const int w = int(std::floor(r + 1.0));
    Site x = center;
    for (int i = 0; i < d; ++i) x[i] -= w;
    // odometer-style lexicographic scan of the bounding cube
    while (true) {
        if (ball.contains(x)) out.push_back(x);
        int axis = d - 1;
        while (axis >= 0 && x[axis] == center[axis] + w) {
            x[axis] = center[axis] - w;
            --axis;
        }
        if (axis < 0) break;
        ++x[axis];
    }
    return out;
}

double radial_deviation(const LatticeGeometry& geom, const Site& x, double t) {
    if (t < 0) throw ContractError("radial_deviation: t >= 0 required");
    return x.norm() - std::pow(t / geom.omega_d(), 1.0 / geom.dim());
}

BoxIndex::BoxIndex(int d, int half_width) : d_(d), w_(half_width) {
    const std::int64_t n = 2 * std::int64_t(w_) + 1;
    std::int64_t s = 1;
    for (int i = d_ - 1; i >= 0; --i) {
        stride_[static_cast<std::size_t>(i)] = s;
        s *= n;
    }
    size_ = s;
}

void check_box_budget(int d, int half_width, std::int64_t bytes_per_site, std::int64_t budget_bytes) {
    const double n = 2.0 * half_width + 1.0;
    const double total = std::pow(n, d) * double(bytes_per_site);
    if (total > double(budget_bytes)) {
        throw ResourceError("lattice box [-" + std::to_string(half_width) + "," +
                            std::to_string(half_width) + "]^" + std::to_string(d) +
                            " exceeds the memory budget");
    }
}

}  // namespace idla
