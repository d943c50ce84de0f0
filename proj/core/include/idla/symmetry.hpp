#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "idla/site.hpp"

namespace idla {

/// Utilities for the lattice symmetry group of Z^d: coordinate
/// permutations combined with per-axis sign flips (order d! * 2^d).
/// Orbits are identified by the multiset of absolute coordinates.
namespace symmetry {

/// Canonical orbit representative: absolute values sorted descending.
inline Site canonical(int d, Site x) {
    for (int i = 0; i < d; ++i) x[i] = std::abs(x[i]);
    std::sort(x.c.begin(), x.c.begin() + d, std::greater<std::int32_t>());
    return x;
}

/// Every distinct image of `rep` under the group, in lexicographic order.
inline std::vector<Site> orbit(int d, const Site& rep) {
    std::vector<Site> out;
    Site perm = rep;
    std::sort(perm.c.begin(), perm.c.begin() + d);
    do {
        // enumerate sign choices on the d axes; duplicates from zero
        // coordinates are removed by the final sort/unique
        for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
            Site y = perm;
            for (int i = 0; i < d; ++i)
                if (mask & (1u << i)) y[i] = -y[i];
            out.push_back(y);
        }
    } while (std::next_permutation(perm.c.begin(), perm.c.begin() + d));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace symmetry
}  // namespace idla
