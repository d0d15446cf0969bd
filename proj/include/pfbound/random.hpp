#pragma once

// Deterministic random streams. Every stream is an mt19937_64 seeded from
// (seed, stream indices) through splitmix64, and normals come from the
// inverse CDF, so results do not depend on the standard library's
// distribution implementations or on thread scheduling.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pfbound {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for the stream identified by `seed` and a path of indices.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = splitmix64(seed);
    for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
    return s;
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) : engine_(derive_seed(seed, path)) {}

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
    /// Standard normal by inversion.
    double normal();

private:
    std::mt19937_64 engine_;
};

}  // namespace pfbound
