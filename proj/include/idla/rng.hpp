#pragma once

#include <cstdint>
#include <random>

namespace idla {

/// Identifies one independent random substream.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Stream id of particle j in replica r.
constexpr std::uint64_t particle_stream(std::uint64_t replica, std::uint64_t particle) {
    return (replica << 32) + particle;
}

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

using Engine = std::mt19937_64;

/// Engine for a (master_seed, stream_id) pair. Two rounds of splitmix keep
/// nearby pairs from producing correlated initial states.
inline Engine make_engine(const SeedSpec& seed) {
    const std::uint64_t key = detail::splitmix64(detail::splitmix64(seed.master_seed) ^ seed.stream_id);
    return Engine(key);
}

/// Unbiased draw from {0, ..., n-1}. Used instead of uniform_int_distribution
/// so that streams are identical across standard library implementations.
inline std::uint64_t uniform_below(Engine& engine, std::uint64_t n) {
    // 2^64 mod n; the accepted range [threshold, 2^64) is a multiple of n.
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t x;
    do {
        x = engine();
    } while (x < threshold);
    return x % n;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(Engine& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace idla
