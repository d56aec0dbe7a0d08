#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "flopsd/vec2.hpp"

namespace flopsd {

// Deterministic RNG with hand-rolled distributions so that draws are
// bit-identical across standard library implementations. All randomness in
// the repo flows through explicit Rng parameters; there is no hidden state.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be positive.
    int uniform_int(int n) {
        int k = static_cast<int>(uniform() * static_cast<double>(n));
        return k >= n ? n - 1 : k;
    }

    // Standard normal pair via Box-Muller; consumes exactly two uniforms.
    Vec2 normal2() {
        double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * kPi * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

    double normal() { return normal2().x; }

    static constexpr double kPi = 3.14159265358979323846;

  private:
    std::mt19937_64 engine_;
};

}  // namespace flopsd
