#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string_view>

namespace attrikit {

// SplitMix64: the single PRNG used everywhere in this project. Every
// stochastic component takes an explicit seed, so results are reproducible
// bit-for-bit across platforms.
struct SplitMix64 {
    uint64_t state = 0;

    explicit SplitMix64(uint64_t seed = 0) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0,1): top 53 bits scaled by 2^-53.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform double in (-1,1).
    double next_signed() { return 2.0 * next_double() - 1.0; }

    // Unbiased-enough index draw for shuffling; modulo bias is irrelevant at
    // the ranges used here and keeps the stream layout trivial to pin down.
    uint64_t next_below(uint64_t bound) { return bound ? next() % bound : 0; }
};

// SplitMix64 finalizer used as a mixing function for deriving sub-seeds.
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic seed derivation: independent streams for (seed, stream id).
inline uint64_t hash_combine(uint64_t a, uint64_t b) {
    return mix64(mix64(a + 0x9E3779B97F4A7C15ULL) ^ (b + 0xD1B54A32D192ED03ULL));
}

inline uint64_t hash3(uint64_t a, uint64_t b, uint64_t c) {
    return hash_combine(hash_combine(a, b), c);
}

constexpr uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr uint64_t kFnvPrime = 1099511628211ULL;

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

// Standard normal draws via Box-Muller over a SplitMix64 stream.
struct GaussianSampler {
    SplitMix64 rng;
    bool has_spare = false;
    double spare = 0.0;

    explicit GaussianSampler(uint64_t seed) : rng(seed) {}

    double next() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        double u1 = rng.next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double u2 = rng.next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare = r * std::sin(a);
        has_spare = true;
        return r * std::cos(a);
    }
};

}  // namespace attrikit
