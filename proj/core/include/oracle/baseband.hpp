#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "oracle/rng.hpp"

namespace oracle::baseband {

using cplx = std::complex<double>;

enum class Constellation : int { qpsk = 4, qam16 = 16 };

int bits_per_symbol(Constellation c);

// Gray-mapped square QAM with unit average symbol power. Bits fill the
// I axis first, then the Q axis (QPSK: bit0 -> I sign, bit1 -> Q sign;
// bits 00 map to (+1,+1)/sqrt(2)).
std::vector<cplx> modulate(const std::vector<uint8_t>& bits, Constellation c);

// Hard-decision per-axis slicing, inverse of modulate for noiseless input.
std::vector<uint8_t> demodulate(const std::vector<cplx>& symbols, Constellation c);

// The ideal constellation points (in bit-index order).
std::vector<cplx> constellation_points(Constellation c);

// Fraction of differing bits. Throws InvalidInput on length mismatch.
double measure_ber(const std::vector<uint8_t>& tx_bits,
                   const std::vector<uint8_t>& rx_bits);

// Gray-coded QPSK bit error rate over AWGN, Q(sqrt(2 Eb/N0)).
double qpsk_ber_awgn(double ebn0_db);

struct Frame {
    std::vector<cplx> preamble;         // known at the receiver
    std::vector<cplx> payload_symbols;  // constellation mapping of payload_bits
    std::vector<uint8_t> payload_bits;

    std::vector<cplx> samples() const;  // preamble followed by payload
};

// Preamble fixed per run: QPSK symbols drawn from the run seed only.
std::vector<cplx> make_preamble(uint64_t run_seed, int length);

Frame make_frame(const std::vector<cplx>& preamble, int payload_symbols,
                 Constellation c, Rng& rng);

struct ChannelRealization {
    cplx gain{1.0, 0.0};
    // dB relative to unit signal power; -inf means noiseless.
    double noise_power_db = -std::numeric_limits<double>::infinity();
    uint64_t seed = 0;

    bool noiseless() const;
    double noise_power() const;  // linear, 0 when noiseless
};

// One complex flat-fading gain per capture, CN(0,1) so |gain| is Rayleigh.
// Draws are rejected until |gain| >= min_gain.
cplx sample_rayleigh_gain(Rng& rng, double min_gain = 0.0);

struct ImpairmentTag {  // metadata only; the model itself lives in impairments
    std::string label;
};

struct IqTrace {
    std::vector<cplx> samples;
    double sample_rate_hz = 0.0;
    int device_label = 0;
    ChannelRealization channel;
    ImpairmentTag impairment;
};

// output = gain * input + circular complex Gaussian noise of the configured
// power; the noise stream is derived from ch.seed, so equal realizations
// give bit-identical outputs.
IqTrace apply_channel(const IqTrace& trace, const ChannelRealization& ch);
std::vector<cplx> apply_channel(const std::vector<cplx>& samples,
                                const ChannelRealization& ch);

struct Equalized {
    cplx gain_estimate;
    std::vector<cplx> symbols;  // payload divided by the gain estimate
};

// Least-squares fit of the received preamble onto the known one:
//   g = <p, r> / <p, p>,   equalized = payload / g.
// The trace must start with the transmitted preamble (frame-aligned).
// Throws ChannelUnrecoverable when the preamble energy is ~zero.
Equalized estimate_and_equalize(const IqTrace& trace,
                                const std::vector<cplx>& known_preamble);
Equalized estimate_and_equalize(const std::vector<cplx>& samples,
                                const std::vector<cplx>& known_preamble);

}  // namespace oracle::baseband
