#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace homp {
namespace rng {

// Counter-based generation: every variate is a pure function of
// (seed, stream, path, step), so ensembles are reproducible bit-for-bit no
// matter how work is scheduled across threads.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Philox2x64-10 block cipher (Salmon et al.), counter = (c0, c1), key = k.
inline std::pair<std::uint64_t, std::uint64_t> philox2x64(std::uint64_t c0, std::uint64_t c1, std::uint64_t key) {
    constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ULL;
    constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;
    for (int round = 0; round < 10; ++round) {
        const auto prod = static_cast<unsigned __int128>(kMul) * c0;
        const auto lo = static_cast<std::uint64_t>(prod);
        const auto hi = static_cast<std::uint64_t>(prod >> 64);
        c0 = hi ^ key ^ c1;
        c1 = lo;
        key += kWeyl;
    }
    return {c0, c1};
}

// Derived cipher key for a (seed, stream) pair.
inline std::uint64_t make_key(std::uint64_t seed, std::uint64_t stream = 0) {
    return splitmix64(seed) ^ splitmix64(~stream * 0x6A09E667F3BCC909ULL);
}

// Uniform in [0, 1) from the top 53 bits.
inline double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Standard normal for (key, path, step), Box-Muller on one Philox block.
inline double normal(std::uint64_t key, std::uint64_t path, std::uint64_t step) {
    const auto [a, b] = philox2x64(path, step, key);
    const double u1 = 1.0 - to_unit(a);  // (0, 1], keeps log finite
    const double u2 = to_unit(b);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Uniform in [lo, hi) for (key, path, step); used for jittered restarts.
inline double uniform(std::uint64_t key, std::uint64_t path, std::uint64_t step, double lo, double hi) {
    const auto [a, b] = philox2x64(path, step, key ^ 0x5851F42D4C957F2DULL);
    (void)b;
    return lo + (hi - lo) * to_unit(a);
}

}  // namespace rng
}  // namespace homp
