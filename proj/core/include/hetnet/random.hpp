#pragma once

#include <cstdint>
#include <random>

namespace hetnet {

/// The engine used everywhere. Its output sequence is fixed by the standard;
/// the helpers below avoid std:: distributions, whose algorithms vary between
/// standard libraries, so a seed yields the same numbers on every platform.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed of the i-th item derived from a master seed. Counter-based, so each
/// item can be generated independently of the others.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index + 0x632BE59BD9B4E019ull));
}

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform in (0, 1].
inline double uniform01_open_low(Rng& rng) { return 1.0 - uniform01(rng); }

/// Standard normal via Box-Muller; draws two uniforms per call.
double standard_normal(Rng& rng);

/// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const auto i = static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n));
    return i < n ? i : n - 1;
}

} // namespace hetnet
