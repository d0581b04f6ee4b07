#pragma once

// Stateless counter-based random numbers: every draw is a pure function of
// (seed, stream, index), so sharded sampling reproduces the serial result.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace spdc {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) : seed_(splitmix64(seed)) {}

    constexpr std::uint64_t bits(std::uint64_t stream, std::uint32_t index) const {
        return splitmix64(splitmix64(seed_ ^ splitmix64(stream)) + index);
    }

    /// Uniform in the open interval (0, 1).
    constexpr double uniform(std::uint64_t stream, std::uint32_t index) const {
        return (static_cast<double>(bits(stream, index) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal from draws (index, index + 1) via Box-Muller.
    double normal(std::uint64_t stream, std::uint32_t index) const {
        const double u1 = uniform(stream, index);
        const double u2 = uniform(stream, index + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t seed_;
};

}  // namespace spdc
