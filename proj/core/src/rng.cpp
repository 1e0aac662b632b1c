#include "oracle/rng.hpp"

#include <cmath>

namespace oracle {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : eng_(mix64(mix64(seed) ^ mix64(stream * 0xda942042e4dd58b5ULL + 1))) {}

std::uint64_t Rng::next_u64() { return eng_(); }

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
    // Rejection sampling on the top of the range to stay unbiased.
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double Rng::gaussian() {
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);  // log(0) guard
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

std::complex<double> Rng::cgaussian(double variance) {
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1) * variance);
    const double phi = 6.283185307179586 * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace oracle
