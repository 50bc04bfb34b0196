#pragma once

#include <cstdint>
#include <random>

namespace srh {

/// splitmix64 step, used to derive independent stream seeds from one root seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d9ecca9aae3dd1ull;
    return z ^ (z >> 31);
}

/// Deterministic per-purpose RNG stream: same (seed, stream) gives same draws.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0xa076bca9f2c1bd4dull * (stream + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

} // namespace srh
