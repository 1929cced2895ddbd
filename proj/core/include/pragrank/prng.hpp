#pragma once

// Portable seeded randomness.
//
// Streams are std::mt19937_64 (output sequence fixed by the C++ standard),
// seeded through SplitMix64 mixing of (seed, key hash, index). Uniform reals
// and bounded integers are derived from raw 64-bit outputs by hand, since the
// standard <random> distributions are not reproducible across library
// implementations.

#include <cstdint>
#include <random>
#include <string_view>

namespace pragrank {

inline constexpr std::string_view kPrngAlgorithm = "mt19937_64+splitmix64";

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
    return splitmix64(splitmix64(seed) ^ salt);
}

// Seed for everything drawn on behalf of one instance.
constexpr std::uint64_t instance_seed(std::uint64_t seed, std::string_view instance_id) noexcept {
    return mix_seed(seed, fnv1a64(instance_id));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform on {0, ..., bound - 1}; rejection sampling, bound >= 1.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t r;
        do {
            r = next();
        } while (r >= limit);
        return r % bound;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace pragrank
