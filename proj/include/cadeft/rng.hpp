#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace cadeft {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace detail

// Deterministic random source. The same seed and the same call sequence
// produce the same outputs on every platform, which is why bounded draws are
// implemented here instead of with std::uniform_int_distribution (whose output
// is implementation-defined). Every randomized operation in this library takes
// a RandomSource explicitly.
//
// A RandomSource must not be shared across concurrent callers; derive one
// substream per worker instead.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased draw from [0, n).
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Independent stream keyed by (seed, index). Distinct indices give streams
    // that never share engine state with each other or with the parent.
    RandomSource substream(std::uint64_t index) const {
        return RandomSource(detail::splitmix64(seed_ ^ detail::splitmix64(index + 1)));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace cadeft
