#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>

namespace idla {

/// Highest lattice dimension supported by the fixed-capacity Site.
inline constexpr int kMaxDim = 8;

/// A lattice point of Z^d.  Components beyond the active dimension are
/// kept at zero, so comparison, hashing and norms never need to know d.
struct Site {
    std::array<std::int32_t, kMaxDim> c{};

    Site() = default;
    Site(std::int32_t x, std::int32_t y, std::int32_t z) : c{x, y, z} {}

    std::int32_t& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    std::int32_t operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

    /// Squared Euclidean norm, exact in integers.
    std::int64_t norm2() const {
        std::int64_t s = 0;
        for (int i = 0; i < kMaxDim; ++i) s += std::int64_t(c[i]) * c[i];
        return s;
    }
    double norm() const { return std::sqrt(double(norm2())); }

    friend Site operator+(Site a, const Site& b) {
        for (int i = 0; i < kMaxDim; ++i) a.c[i] += b.c[i];
        return a;
    }
    friend Site operator-(Site a, const Site& b) {
        for (int i = 0; i < kMaxDim; ++i) a.c[i] -= b.c[i];
        return a;
    }

    bool operator==(const Site&) const = default;
    /// Lexicographic by coordinate; defines all deterministic
    /// enumeration and serialization orders.
    auto operator<=>(const Site&) const = default;
};

struct SiteHash {
    std::size_t operator()(const Site& s) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (int i = 0; i < kMaxDim; ++i) {
            h ^= std::uint64_t(std::uint32_t(s.c[i])) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return std::size_t(h);
    }
};

/// Smallest integer b with |x| <= b.
inline int ceil_norm(const Site& x) {
    const std::int64_t n2 = x.norm2();
    auto r = std::int64_t(std::floor(std::sqrt(double(n2))));
    while (r * r > n2) --r;
    while (r * r < n2) ++r;   // now r = ceil(sqrt(n2))
    return int(r);
}

}  // namespace idla
