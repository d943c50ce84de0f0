#pragma once

#include <array>
#include <cstdint>

namespace idla {

/// Counter-seeded xoshiro256++ stream.
///
/// A stream is addressed by (master_seed, stream_index); the state is
/// derived by running the splitmix64 finalizer over the pair, so any
/// worker can reconstruct its stream without coordination and two
/// streams with the same address produce identical output forever.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    std::uint64_t next_u64();

    /// Uniform in [0, n), unbiased (Lemire rejection).
    std::uint64_t uniform_below(std::uint64_t n);

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double();

    /// Raw state, for snapshots.
    std::array<std::uint64_t, 4> state() const { return s_; }
    void set_state(const std::array<std::uint64_t, 4>& s) { s_ = s; }

    bool operator==(const RngStream&) const = default;

private:
    std::uint64_t master_seed_ = 0;
    std::uint64_t stream_index_ = 0;
    std::array<std::uint64_t, 4> s_{};
};

/// splitmix64 finalizer; the documented seed-mixing primitive.
std::uint64_t mix64(std::uint64_t z);

}  // namespace idla
