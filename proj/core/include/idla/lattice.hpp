#pragma once

#include <cstdint>
#include <vector>

#include "idla/errors.hpp"
#include "idla/site.hpp"

namespace idla {

/// Volume of the unit ball in R^d: pi^(d/2) / Gamma(d/2 + 1).
double omega(int d);

/// Dimension plus the handful of derived constants everything else needs.
class LatticeGeometry {
public:
    explicit LatticeGeometry(int d);

    int dim() const { return d_; }
    double omega_d() const { return omega_d_; }
    /// Green asymptotic constant a_d = 2 / ((d-2) omega_d), d >= 3.
    double green_constant() const;

    /// Number of lattice neighbors, 2d.
    int degree() const { return 2 * d_; }

    bool operator==(const LatticeGeometry&) const = default;

private:
    int d_;
    double omega_d_;
};

/// Euclidean ball used for membership tests.  Membership is
/// |x - center|^2 <= r^2 + kBallTie so that boundary sites do not flap
/// across platforms when r^2 lands on an integer.
struct Ball {
    Site center;
    double radius = 0.0;

    bool contains(const Site& x) const {
        const Site rel = x - center;
        return double(rel.norm2()) <= radius * radius + kTie;
    }
    static constexpr double kTie = 1e-12;
};

/// All sites of B_r(center) in lexicographic order.  r < 0 yields an
/// empty set.
std::vector<Site> discrete_ball(int d, const Site& center, double r);

/// |x| - (t / omega_d)^(1/d): positive when x runs ahead of the mean
/// sphere at particle count t.
double radial_deviation(const LatticeGeometry& geom, const Site& x, double t);

/// Flat indexing for the symmetric cube [-W, W]^d in lexicographic
/// order (axis 0 most significant).
class BoxIndex {
public:
    BoxIndex() = default;
    BoxIndex(int d, int half_width);

    int dim() const { return d_; }
    int half_width() const { return w_; }
    std::int64_t size() const { return size_; }

    bool contains(const Site& x) const {
        for (int i = 0; i < d_; ++i)
            if (x[i] < -w_ || x[i] > w_) return false;
        return true;
    }

    std::int64_t flat(const Site& x) const {
        std::int64_t idx = 0;
        for (int i = 0; i < d_; ++i) idx += std::int64_t(x[i] + w_) * stride_[static_cast<std::size_t>(i)];
        return idx;
    }

    std::int64_t stride(int axis) const { return stride_[static_cast<std::size_t>(axis)]; }

    Site site(std::int64_t idx) const {
        Site x;
        for (int i = 0; i < d_; ++i) {
            x[i] = std::int32_t(idx / stride_[static_cast<std::size_t>(i)]) - w_;
            idx %= stride_[static_cast<std::size_t>(i)];
        }
        return x;
    }

private:
    int d_ = 0;
    int w_ = 0;
    std::int64_t size_ = 0;
    std::array<std::int64_t, kMaxDim> stride_{};
};

/// Throws ResourceError when a cube of the given half-width would
/// exceed `budget_bytes` at `bytes_per_site`.
void check_box_budget(int d, int half_width, std::int64_t bytes_per_site,
                      std::int64_t budget_bytes = (std::int64_t(6) << 30));

}  // namespace idla
