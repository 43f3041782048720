#pragma once

#include <array>
#include <cstdint>

namespace lorentz {

/// SplitMix64 finalizer; used to derive well-separated seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Philox4x32-10 block function (Salmon et al., counter-based RNG).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// Counter-based random stream. The pair (seed, stream_id) fully determines
/// the sequence of draws; `counter` is the number of 128-bit blocks consumed.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t counter() const { return counter_; }
    /// Number of 64-bit draws taken so far.
    std::uint64_t draws() const { return draws_; }

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t counter_ = 0;
    std::uint64_t draws_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
};

}  // namespace lorentz
