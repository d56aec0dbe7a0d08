#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace flopsd {

// FNV-1a, used for config hashes, checkpoint hashes and seed-stream derivation.
inline constexpr uint64_t kFnvOffsetBasis = 1469598103934665603ULL;
inline constexpr uint64_t kFnvPrime = 1099511628211ULL;

inline uint64_t fnv1a(std::span<const unsigned char> bytes, uint64_t h = kFnvOffsetBasis) {
    for (unsigned char b : bytes) {
        h ^= static_cast<uint64_t>(b);
        h *= kFnvPrime;
    }
    return h;
}

inline uint64_t fnv1a(std::string_view s, uint64_t h = kFnvOffsetBasis) {
    return fnv1a(std::span<const unsigned char>(
                     reinterpret_cast<const unsigned char*>(s.data()), s.size()),
                 h);
}

inline uint64_t fnv1a_u64(uint64_t value, uint64_t h = kFnvOffsetBasis) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    return fnv1a(std::span<const unsigned char>(bytes, 8), h);
}

// Derives a named RNG stream from a base seed. Every stage/arm of the pipeline
// gets its own stream so that runs are reproducible piece by piece.
inline uint64_t mix_seed(uint64_t seed, std::string_view tag, uint64_t a = 0, uint64_t b = 0) {
    uint64_t h = fnv1a_u64(seed);
    h = fnv1a(tag, h);
    h = fnv1a_u64(a, h);
    h = fnv1a_u64(b, h);
    return h;
}

}  // namespace flopsd
