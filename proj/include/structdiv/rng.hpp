#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace structdiv {

// splitmix64 (Steele, Lea, Flood 2014). Chosen as the project-wide generator
// because its output sequence is fully defined by this code, so seeded runs
// reproduce byte-for-byte on any platform. Not cryptographic.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    // Independent substream for (seed, stream_index); used so parallel
    // consumers (bootstrap iterations, chain samples) cannot interact.
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t stream_index) {
        return SplitMix64(mix(seed) + stream_index * 0x9E3779B97F4A7C15ULL);
    }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

// First `count` entries of a Fisher-Yates shuffle of [0, population): a
// uniform draw without replacement, in draw order.
inline std::vector<std::uint32_t> sample_without_replacement(std::uint32_t population,
                                                             std::uint32_t count,
                                                             SplitMix64& rng) {
    std::vector<std::uint32_t> pool(population);
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint64_t j = i + rng.below(population - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace structdiv
