#pragma once

#include <cstdint>
#include <random>

namespace svtv {

// Seeded generator used everywhere randomness enters (noise, property tests,
// estimator draws). std::mt19937_64 has a standardized output sequence; the
// distributions below are written out by hand because the std:: distributions
// are implementation-defined, and golden files must not depend on the stdlib.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the basic Box-Muller transform; the second variate is cached.
    double normal();

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace svtv
