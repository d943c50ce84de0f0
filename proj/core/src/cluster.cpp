#include "idla/cluster.hpp"

#include <cmath>
#include <mutex>

namespace idla {

namespace {
constexpr int kInitialHalfWidth = 8;
}

const std::vector<std::int64_t>& radius_bucket_totals(int d, int half_width) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::vector<std::int64_t>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& entry = cache[{d, half_width}];
    if (!entry.empty()) return entry;

    entry.assign(std::size_t(half_width) + 1, 0);
    const BoxIndex box(d, half_width);
    for (std::int64_t i = 0; i < box.size(); ++i) {
        const int b = ceil_norm(box.site(i));
        if (b <= half_width) ++entry[std::size_t(b)];
    }
    return entry;
}

Cluster::Cluster(const LatticeGeometry& geom, RngStream rng)
    : geom_(geom), rng_(rng), box_(geom.dim(), kInitialHalfWidth) {
    bits_.assign(std::size_t((box_.size() + 63) / 64), 0);
    arrival_.assign(std::size_t(box_.size()), 0);
    bucket_total_ = radius_bucket_totals(geom_.dim(), box_.half_width());
    bucket_occ_.assign(std::size_t(2 * box_.half_width() + 2), 0);
}

std::int64_t Cluster::arrival(const Site& x) const {
    if (!occupied(x)) throw ContractError("Cluster::arrival: site not occupied");
    return arrival_[std::size_t(box_.flat(x))];
}

void Cluster::add(const Site& x, std::int64_t t) {
    if (t <= 0 || t > std::int64_t(UINT32_MAX))
        throw ContractError("Cluster::add: arrival time out of range");
    int max_coord = 0;
    for (int i = 0; i < geom_.dim(); ++i) max_coord = std::max(max_coord, std::abs(x[i]));
    if (max_coord >= box_.half_width() - 1)
        regrow(std::max(2 * box_.half_width(), max_coord + 4));

    const std::int64_t idx = box_.flat(x);
    if (test_bit(idx)) throw ContractError("Cluster::add: site already occupied");
    set_bit(idx);
    arrival_[std::size_t(idx)] = std::uint32_t(t);
    ++count_;

    const int b = ceil_norm(x);
    if (std::size_t(b) >= bucket_occ_.size()) bucket_occ_.resize(std::size_t(b) + 1, 0);
    ++bucket_occ_[std::size_t(b)];
    max_bucket_ = std::max(max_bucket_, b);
    while (inner_radius_ + 1 <= box_.half_width() &&
           bucket_occ_[std::size_t(inner_radius_ + 1)] ==
               bucket_total_[std::size_t(inner_radius_ + 1)])
        ++inner_radius_;
}

void Cluster::regrow(int new_half_width) {
    check_box_budget(geom_.dim(), new_half_width, 4 + 1);
    const BoxIndex old_box = box_;
    const auto old_bits = std::move(bits_);
    const auto old_arrival = std::move(arrival_);

    box_ = BoxIndex(geom_.dim(), new_half_width);
    bits_.assign(std::size_t((box_.size() + 63) / 64), 0);
    arrival_.assign(std::size_t(box_.size()), 0);
    for (std::int64_t i = 0; i < old_box.size(); ++i) {
        if ((old_bits[std::size_t(i >> 6)] >> (i & 63)) & 1ULL) {
            const std::int64_t j = box_.flat(old_box.site(i));
            set_bit(j);
            arrival_[std::size_t(j)] = old_arrival[std::size_t(i)];
        }
    }
    bucket_total_ = radius_bucket_totals(geom_.dim(), box_.half_width());
    ++epoch_;
}

void Cluster::rebuild_radial_bookkeeping() {
    bucket_occ_.assign(std::size_t(2 * box_.half_width() + 2), 0);
    count_ = 0;
    max_bucket_ = 0;
    for (std::int64_t i = 0; i < box_.size(); ++i) {
        if (!test_bit(i)) continue;
        ++count_;
        const int b = ceil_norm(box_.site(i));
        if (std::size_t(b) >= bucket_occ_.size()) bucket_occ_.resize(std::size_t(b) + 1, 0);
        ++bucket_occ_[std::size_t(b)];
        max_bucket_ = std::max(max_bucket_, b);
    }
    inner_radius_ = -1;
    while (inner_radius_ + 1 <= box_.half_width() &&
           bucket_occ_[std::size_t(inner_radius_ + 1)] ==
               bucket_total_[std::size_t(inner_radius_ + 1)])
        ++inner_radius_;
}

bool Cluster::operator==(const Cluster& other) const {
    if (geom_.dim() != other.geom_.dim() || count_ != other.count_ ||
        rng_ != other.rng_)
        return false;
    bool equal = true;
    for_each_occupied([&](const Site& x, std::int64_t t) {
        if (!other.occupied(x) || other.arrival(x) != t) equal = false;
    });
    return equal;
}

}  // namespace idla
