#include "idla/grid_function.hpp"

#include <cinttypes>
#include <cstdio>

namespace idla {

GridFunction::GridFunction(int d, int half_width) : box_(d, half_width) {
    check_box_budget(d, half_width, std::int64_t(sizeof(double) + 1));
    values_.assign(static_cast<std::size_t>(box_.size()), 0.0);
    mask_.assign(static_cast<std::size_t>(box_.size()), 0);
}

std::vector<Site> GridFunction::domain_sites() const {
    std::vector<Site> out;
    for (std::int64_t i = 0; i < box_.size(); ++i)
        if (mask_[static_cast<std::size_t>(i)]) out.push_back(box_.site(i));
    return out;
}

void write_field_csv(const GridFunction& f, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ContractError("write_field_csv: cannot open " + path);
    const int d = f.dim();
    for (int i = 0; i < d; ++i) std::fprintf(fp, "x%d,", i + 1);
    std::fprintf(fp, "value\n");
    for (std::int64_t i = 0; i < f.box().size(); ++i) {
        if (!f.raw_defined(i)) continue;
        const Site x = f.box().site(i);
        for (int j = 0; j < d; ++j) std::fprintf(fp, "%" PRId32 ",", x[j]);
        std::fprintf(fp, "%.17g\n", f.raw(i));
    }
    std::fclose(fp);
}

}  // namespace idla
