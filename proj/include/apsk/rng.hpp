#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace apsk {

/// SplitMix64 generator. Cheap to seed, which makes it practical to give
/// every Monte Carlo sample its own stream derived from (seed, index):
/// results then depend only on the seed, never on evaluation order or
/// worker count.
struct SplitMix64 {
    std::uint64_t state;

    explicit constexpr SplitMix64(std::uint64_t seed) : state(seed) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

/// Finalizing avalanche, same mixing as SplitMix64's output stage.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for an independent substream identified by (seed, index).
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

/// 53-bit uniform in [0, 1).
inline double u01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// 53-bit uniform in (0, 1]; safe as a log() argument.
inline double u01_open(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

inline double uniform_real(SplitMix64& g, double lo, double hi) {
    return lo + (hi - lo) * u01(g.next());
}

/// Unbiased-enough uniform index in [0, n) via 128-bit multiply-shift.
inline std::uint32_t uniform_index(SplitMix64& g, std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(g.next()) * n) >> 64);
}

struct GaussPair {
    double z0;
    double z1;
};

/// Standard-normal pair via Box-Muller (fixed two-draw consumption).
inline GaussPair gauss_pair(SplitMix64& g) {
    const double u1 = u01_open(g.next());
    const double u2 = u01(g.next());
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
}

inline double gaussian(SplitMix64& g, double sigma) {
    return sigma * gauss_pair(g).z0;
}

}  // namespace apsk
