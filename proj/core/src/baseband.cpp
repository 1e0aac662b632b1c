#include "oracle/baseband.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "oracle/errors.hpp"

namespace oracle::baseband {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt10 = 0.31622776601683794;

// 2-bit Gray code per axis for 16-QAM: 00 01 11 10 -> +3 +1 -1 -3.
constexpr std::array<double, 4> kPam4 = {3.0, 1.0, -1.0, -3.0};

int pam4_level(int b1, int b0) {
    const int gray = (b1 << 1) | b0;
    switch (gray) {
        case 0b00: return 0;
        case 0b01: return 1;
        case 0b11: return 2;
        default: return 3;  // 0b10
    }
}

void pam4_bits(double amp, uint8_t& b1, uint8_t& b0) {
    // slicing thresholds at +2, 0, -2 (pre-normalization units)
    if (amp > 2.0) { b1 = 0; b0 = 0; }
    else if (amp > 0.0) { b1 = 0; b0 = 1; }
    else if (amp > -2.0) { b1 = 1; b0 = 1; }
    else { b1 = 1; b0 = 0; }
}

}  // namespace

int bits_per_symbol(Constellation c) {
    return c == Constellation::qpsk ? 2 : 4;
}

std::vector<cplx> modulate(const std::vector<uint8_t>& bits, Constellation c) {
    const int bps = bits_per_symbol(c);
    if (bits.size() % static_cast<size_t>(bps) != 0)
        throw InvalidInput("modulate: bit count not divisible by bits per symbol");
    std::vector<cplx> out;
    out.reserve(bits.size() / static_cast<size_t>(bps));
    if (c == Constellation::qpsk) {
        for (size_t k = 0; k < bits.size(); k += 2) {
            const double i = bits[k] ? -kInvSqrt2 : kInvSqrt2;
            const double q = bits[k + 1] ? -kInvSqrt2 : kInvSqrt2;
            out.emplace_back(i, q);
        }
    } else {
        for (size_t k = 0; k < bits.size(); k += 4) {
            const double i = kPam4[static_cast<size_t>(pam4_level(bits[k], bits[k + 1]))];
            const double q = kPam4[static_cast<size_t>(pam4_level(bits[k + 2], bits[k + 3]))];
            out.emplace_back(i * kInvSqrt10, q * kInvSqrt10);
        }
    }
    return out;
}

std::vector<uint8_t> demodulate(const std::vector<cplx>& symbols, Constellation c) {
    std::vector<uint8_t> bits;
    bits.reserve(symbols.size() * static_cast<size_t>(bits_per_symbol(c)));
    if (c == Constellation::qpsk) {
        for (const cplx& s : symbols) {
            bits.push_back(s.real() < 0.0 ? 1 : 0);
            bits.push_back(s.imag() < 0.0 ? 1 : 0);
        }
    } else {
        for (const cplx& s : symbols) {
            uint8_t b1, b0;
            pam4_bits(s.real() / kInvSqrt10, b1, b0);
            bits.push_back(b1);
            bits.push_back(b0);
            pam4_bits(s.imag() / kInvSqrt10, b1, b0);
            bits.push_back(b1);
            bits.push_back(b0);
        }
    }
    return bits;
}

std::vector<cplx> constellation_points(Constellation c) {
    const int bps = bits_per_symbol(c);
    const int n = 1 << bps;
    std::vector<cplx> pts;
    pts.reserve(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
        std::vector<uint8_t> bits(static_cast<size_t>(bps));
        for (int b = 0; b < bps; ++b)
            bits[static_cast<size_t>(b)] = static_cast<uint8_t>((v >> (bps - 1 - b)) & 1);
        pts.push_back(modulate(bits, c)[0]);
    }
    return pts;
}

double measure_ber(const std::vector<uint8_t>& tx_bits,
                   const std::vector<uint8_t>& rx_bits) {
    if (tx_bits.size() != rx_bits.size())
        throw InvalidInput("measure_ber: bit sequences differ in length");
    if (tx_bits.empty()) throw InvalidInput("measure_ber: empty input");
    size_t errors = 0;
    for (size_t k = 0; k < tx_bits.size(); ++k)
        errors += (tx_bits[k] != rx_bits[k]) ? 1u : 0u;
    return static_cast<double>(errors) / static_cast<double>(tx_bits.size());
}

double qpsk_ber_awgn(double ebn0_db) {
    const double ebn0 = std::pow(10.0, ebn0_db / 10.0);
    return 0.5 * std::erfc(std::sqrt(ebn0));  // Q(sqrt(2x)) = erfc(sqrt(x))/2
}

std::vector<cplx> Frame::samples() const {
    std::vector<cplx> s;
    s.reserve(preamble.size() + payload_symbols.size());
    s.insert(s.end(), preamble.begin(), preamble.end());
    s.insert(s.end(), payload_symbols.begin(), payload_symbols.end());
    return s;
}

std::vector<cplx> make_preamble(uint64_t run_seed, int length) {
    if (length <= 0) throw InvalidInput("make_preamble: non-positive length");
    Rng rng(run_seed, /*stream=*/0x70726561ULL);  // dedicated preamble stream
    std::vector<uint8_t> bits(static_cast<size_t>(length) * 2);
    for (auto& b : bits) b = static_cast<uint8_t>(rng.below(2));
    return modulate(bits, Constellation::qpsk);
}

Frame make_frame(const std::vector<cplx>& preamble, int payload_symbols,
                 Constellation c, Rng& rng) {
    if (payload_symbols <= 0) throw InvalidInput("make_frame: empty payload");
    Frame f;
    f.preamble = preamble;
    f.payload_bits.resize(static_cast<size_t>(payload_symbols) *
                          static_cast<size_t>(bits_per_symbol(c)));
    for (auto& b : f.payload_bits) b = static_cast<uint8_t>(rng.below(2));
    f.payload_symbols = modulate(f.payload_bits, c);
    return f;
}

bool ChannelRealization::noiseless() const {
    return std::isinf(noise_power_db) && noise_power_db < 0.0;
}

double ChannelRealization::noise_power() const {
    if (noiseless()) return 0.0;
    if (!std::isfinite(noise_power_db))
        throw InvalidInput("ChannelRealization: noise_power_db must be finite or -inf");
    return std::pow(10.0, noise_power_db / 10.0);
}

cplx sample_rayleigh_gain(Rng& rng, double min_gain) {
    for (;;) {
        const cplx g = rng.cgaussian(1.0);
        if (std::abs(g) >= std::max(min_gain, 1e-9)) return g;
    }
}

std::vector<cplx> apply_channel(const std::vector<cplx>& samples,
                                const ChannelRealization& ch) {
    if (samples.empty()) throw InvalidInput("apply_channel: empty trace");
    if (std::abs(ch.gain) <= 0.0) throw InvalidInput("apply_channel: zero gain");
    std::vector<cplx> out(samples.size());
    const double np = ch.noise_power();
    if (np == 0.0) {
        for (size_t k = 0; k < samples.size(); ++k) out[k] = ch.gain * samples[k];
    } else {
        Rng noise(ch.seed, /*stream=*/0x6e6f6973ULL);
        for (size_t k = 0; k < samples.size(); ++k)
            out[k] = ch.gain * samples[k] + noise.cgaussian(np);
    }
    return out;
}

IqTrace apply_channel(const IqTrace& trace, const ChannelRealization& ch) {
    IqTrace out = trace;
    out.samples = apply_channel(trace.samples, ch);
    out.channel = ch;
    return out;
}

Equalized estimate_and_equalize(const std::vector<cplx>& samples,
                                const std::vector<cplx>& known_preamble) {
    const size_t np = known_preamble.size();
    if (np == 0 || samples.size() < np)
        throw InvalidInput("estimate_and_equalize: trace shorter than preamble");
    double energy = 0.0;
    cplx corr{0.0, 0.0};
    for (size_t k = 0; k < np; ++k) {
        energy += std::norm(known_preamble[k]);
        corr += std::conj(known_preamble[k]) * samples[k];
    }
    if (energy < 1e-12)
        throw ChannelUnrecoverable("estimate_and_equalize: preamble energy ~0");
    const cplx gain = corr / energy;
    if (std::abs(gain) < 1e-9)
        throw ChannelUnrecoverable("estimate_and_equalize: estimated gain ~0");
    Equalized eq;
    eq.gain_estimate = gain;
    eq.symbols.resize(samples.size() - np);
    for (size_t k = np; k < samples.size(); ++k)
        eq.symbols[k - np] = samples[k] / gain;
    return eq;
}

Equalized estimate_and_equalize(const IqTrace& trace,
                                const std::vector<cplx>& known_preamble) {
    return estimate_and_equalize(trace.samples, known_preamble);
}

}  // namespace oracle::baseband
