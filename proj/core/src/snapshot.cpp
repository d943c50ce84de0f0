#include <string>

#include "idla/container.hpp"
#include "idla/engine.hpp"

namespace idla {

namespace {
constexpr std::uint16_t kSnapshotVersion = 1;
}

void save_snapshot(const Cluster& c, const std::string& path) {
    BinaryWriter w;
    w.magic("IDLA");
    w.u16(kSnapshotVersion);
    const int d = c.geometry().dim();
    w.u8(std::uint8_t(d));
    w.u8(0);  // flags
    w.u64(std::uint64_t(c.count()));
    const int W = c.box().half_width();
    for (int i = 0; i < d; ++i) {
        w.i32(-W);
        w.i32(W);
    }

    // occupancy bitmap, lexicographic order, LSB-first within each byte
    const std::int64_t n = c.box().size();
    std::vector<std::uint8_t> bitmap(std::size_t((n + 7) / 8), 0);
    std::int64_t prev_arrival = 0;
    BinaryWriter arrivals;
    for (std::int64_t i = 0; i < n; ++i) {
        if (!c.occupied_flat(i)) continue;
        bitmap[std::size_t(i >> 3)] |= std::uint8_t(1u << (i & 7));
        const std::int64_t a = c.arrival(c.box().site(i));
        arrivals.varint(a - prev_arrival);
        prev_arrival = a;
    }
    w.bytes(bitmap.data(), bitmap.size());
    w.bytes(arrivals.buffer().data(), arrivals.buffer().size());

    const RngStream& rng = c.rng();
    w.u64(rng.master_seed());
    w.u64(rng.stream_index());
    for (const auto word : rng.state()) w.u64(word);

    w.finish_to_file(path);
}

Cluster load_snapshot(const std::string& path) {
    BinaryReader r(path);
    r.expect_magic("IDLA");
    if (r.u16() != kSnapshotVersion)
        throw CorruptSnapshotError(path + ": unsupported snapshot version");
    const int d = r.u8();
    if (d < 3 || d > kMaxDim) throw CorruptSnapshotError(path + ": bad dimension");
    r.u8();  // flags
    const auto count = std::int64_t(r.u64());

    int W = -1;
    for (int i = 0; i < d; ++i) {
        const std::int32_t lo = r.i32();
        const std::int32_t hi = r.i32();
        if (lo != -hi || hi < 0) throw CorruptSnapshotError(path + ": bbox not symmetric");
        if (i == 0)
            W = hi;
        else if (hi != W)
            throw CorruptSnapshotError(path + ": bbox not cubic");
    }

    Cluster c(LatticeGeometry(d), RngStream{});
    if (W > c.box().half_width()) {
        // match the saved box exactly so resumed growth is bit-identical
        c.regrow(W);
        c.epoch_ = 0;
    } else if (W != c.box().half_width()) {
        throw CorruptSnapshotError(path + ": bbox smaller than the minimum box");
    }

    const std::int64_t n = c.box_.size();
    std::vector<std::uint8_t> bitmap(std::size_t((n + 7) / 8));
    r.bytes(bitmap.data(), bitmap.size());

    std::int64_t prev_arrival = 0;
    std::int64_t seen = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        if (!((bitmap[std::size_t(i >> 3)] >> (i & 7)) & 1)) continue;
        prev_arrival += r.varint();
        if (prev_arrival <= 0 || prev_arrival > count)
            throw CorruptSnapshotError(path + ": arrival time out of range");
        c.set_bit(i);
        c.arrival_[std::size_t(i)] = std::uint32_t(prev_arrival);
        ++seen;
    }
    if (seen != count) throw CorruptSnapshotError(path + ": occupancy/count mismatch");
    c.rebuild_radial_bookkeeping();

    const std::uint64_t master = r.u64();
    const std::uint64_t stream = r.u64();
    RngStream rng(master, stream);
    std::array<std::uint64_t, 4> state;
    for (auto& word : state) word = r.u64();
    rng.set_state(state);
    c.rng_ = rng;

    if (!r.at_end()) throw CorruptSnapshotError(path + ": trailing bytes");
    return c;
}

}  // namespace idla
