#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Counter-based random numbers (Philox-4x32-10, Salmon et al. 2011).
// Every draw is a pure function of (seed, replicate, stream, step), so
// ensembles are reproducible and independent of thread scheduling.

namespace sdelab::rng {

namespace detail {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(M0, ctr[0], hi0, lo0);
        mulhilo(M1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

}  // namespace detail

/// Stream identifiers reserved for specific purposes within one seed.
inline constexpr std::uint32_t kStreamNoise = 0;       // Brownian increments (shared across modes)
inline constexpr std::uint32_t kStreamInitial = 1;     // initial-condition sampling
inline constexpr std::uint32_t kStreamScratch = 2;     // audits, subsampling, test generators

/// Raw 4x32 block for the key (seed) and counter (replicate, stream, lo, hi).
inline std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint32_t replicate,
                                          std::uint32_t stream, std::uint64_t step) {
    return detail::philox4x32(
        {replicate, stream, static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)},
        {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
}

/// Uniform double in (0,1].
inline double uniform(std::uint64_t seed, std::uint32_t replicate, std::uint32_t stream,
                      std::uint64_t step) {
    auto b = block(seed, replicate, stream, step);
    return (static_cast<double>(b[0]) + 1.0) * 0x1p-32;
}

/// Standard normal via Box-Muller on one counter block.
inline double gaussian(std::uint64_t seed, std::uint32_t replicate, std::uint32_t stream,
                       std::uint64_t step) {
    auto b = block(seed, replicate, stream, step);
    double u1 = (static_cast<double>(b[0]) + 1.0) * 0x1p-32;
    double u2 = (static_cast<double>(b[1]) + 0.5) * 0x1p-32;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace sdelab::rng
