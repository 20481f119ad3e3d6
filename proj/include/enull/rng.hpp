#pragma once

// Counter-based RNG: every variate is a pure function of (seed, key parts),
// so parallel schedules cannot change the stream.

#include <cstdint>

namespace enull {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

// Uniform in (0,1), keyed by up to three counters. The output never hits
// 0 or 1 exactly, so it is safe to feed through normal_quantile.
inline double counter_uniform(std::uint64_t seed, std::uint64_t k0,
                              std::uint64_t k1 = 0, std::uint64_t k2 = 0) {
    std::uint64_t h = detail::splitmix64(seed);
    h = detail::splitmix64(h ^ k0);
    h = detail::splitmix64(h ^ k1);
    h = detail::splitmix64(h ^ k2);
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace enull
