#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace ddm::numeric {

/// Counter-based random stream.
///
/// Draw n of a stream with seed s is splitmix64_mix(s + (n + 1) * 0x9E3779B97F4A7C15),
/// i.e. the SplitMix64 finalizer applied to a Weyl counter. Outputs depend only on
/// (seed, counter), so sequences are identical on every platform with 64-bit
/// unsigned arithmetic. Uniform doubles take the top 53 bits; normals use
/// Box-Muller on two consecutive uniforms.
class RngStream {
public:
    static constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

    explicit RngStream(std::uint64_t seed = 0) noexcept : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix(seed_ + counter_ * golden);
    }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept {
        // rejection sampling
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do { x = next_u64(); } while (x >= limit);
        return x % n;
    }

    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Independent child stream; children of distinct keys never share draws in practice.
    RngStream derive(std::uint64_t key) const noexcept {
        return RngStream(mix(seed_ ^ mix(key + golden)));
    }

    template <typename T>
    void shuffle(std::vector<T>& items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

} // namespace ddm::numeric
