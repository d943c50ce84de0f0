#pragma once

#include <cstdint>
#include <vector>

#include "idla/errors.hpp"
#include "idla/lattice.hpp"
#include "idla/site.hpp"

namespace idla {

/// Scalar field on the lattice sites of a cube [-W, W]^d with a
/// defined-mask; the domain of a field is the set of defined sites.
/// Reads outside the domain throw.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(int d, int half_width);

    const BoxIndex& box() const { return box_; }
    int dim() const { return box_.dim(); }

    bool defined(const Site& x) const {
        return box_.contains(x) && mask_[static_cast<std::size_t>(box_.flat(x))] != 0;
    }

    double at(const Site& x) const {
        if (!box_.contains(x) || !mask_[static_cast<std::size_t>(box_.flat(x))])
            throw ContractError("GridFunction: evaluation outside domain");
        return values_[static_cast<std::size_t>(box_.flat(x))];
    }

    void set(const Site& x, double v) {
        const auto i = static_cast<std::size_t>(box_.flat(x));
        values_[i] = v;
        mask_[i] = 1;
    }

    // unchecked flat access for solver loops
    double raw(std::int64_t idx) const { return values_[static_cast<std::size_t>(idx)]; }
    double& raw(std::int64_t idx) { return values_[static_cast<std::size_t>(idx)]; }
    bool raw_defined(std::int64_t idx) const { return mask_[static_cast<std::size_t>(idx)] != 0; }
    void raw_define(std::int64_t idx) { mask_[static_cast<std::size_t>(idx)] = 1; }

    /// Defined sites in lexicographic order.
    std::vector<Site> domain_sites() const;

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }

private:
    BoxIndex box_;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

/// CSV export with header x1,...,xd,value; rows in lexicographic order.
void write_field_csv(const GridFunction& f, const std::string& path);

}  // namespace idla
