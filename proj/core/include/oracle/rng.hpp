#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace oracle {

// Deterministic random stream addressed by (seed, stream id).
//
// The engine is std::mt19937_64, which the standard pins bit-for-bit, and
// all variate transforms are implemented here instead of going through
// std::*_distribution (whose algorithms are implementation-defined).
// Two Rng instances with the same (seed, stream) therefore produce the
// same sequence on every platform.
class Rng {
   public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53 random bits.
    double uniform();

    // Uniform integer in [0, n), unbiased. n must be > 0.
    std::uint64_t below(std::uint64_t n);

    // Standard normal via Box-Muller (consumes two uniforms).
    double gaussian();

    // Circularly symmetric complex Gaussian with E|z|^2 = variance
    // (variance/2 per real component). Consumes exactly two uniforms.
    std::complex<double> cgaussian(double variance);

    // true with probability p.
    bool bernoulli(double p) { return uniform() < p; }

   private:
    std::mt19937_64 eng_;
};

// One round of splitmix64; used for seed/stream mixing and stable hashing.
std::uint64_t mix64(std::uint64_t x);

}  // namespace oracle
