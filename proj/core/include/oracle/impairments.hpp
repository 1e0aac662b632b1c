#pragma once

#include <complex>
#include <string>
#include <vector>

#include "oracle/baseband.hpp"
#include "oracle/rng.hpp"

namespace oracle::impair {

using baseband::cplx;

// Quadrature mixer gain/phase mismatch. alpha is the relative amplitude
// imbalance (aI - aQ)/(aI + aQ), theta the phase deviation from 90 degrees
// in radians. The distortion acts on a baseband signal s as
//   s_d = mu * s + nu * conj(s)
// with mu = cos(theta/2) + j alpha sin(theta/2),
//      nu = alpha cos(theta/2) - j sin(theta/2).
struct IqImbalance {
    double alpha = 0.0;
    double theta = 0.0;

    cplx mu() const;
    cplx nu() const;
    bool valid() const;     // |alpha| < 1, |theta| <= pi/2
    bool identity() const { return alpha == 0.0 && theta == 0.0; }
};

struct DcOffset {
    cplx offset{0.0, 0.0};

    bool valid() const { return std::abs(offset) < 1.0; }
    // Power of the DC tone relative to unit signal amplitude, in dB.
    double level_db() const;
};

struct ImpairmentConfig {
    IqImbalance iq;
    DcOffset dc;
    std::string label;

    bool identity() const { return iq.identity() && dc.offset == cplx{0.0, 0.0}; }
};

std::vector<cplx> apply_iq_imbalance(const std::vector<cplx>& s, const IqImbalance& imb);
std::vector<cplx> apply_dc_offset(const std::vector<cplx>& s, const DcOffset& dc);

// Canonical transmitter chain order: IQ imbalance first, DC offset second
// (the LO feedthrough sits after the quadrature mixer).
std::vector<cplx> apply_impairment(const std::vector<cplx>& s, const ImpairmentConfig& cfg);

// A device's own manufacturing spread plus a commanded impairment, in chain
// order: residual imbalance, commanded imbalance, then both DC offsets.
std::vector<cplx> apply_tx_chain(const std::vector<cplx>& s,
                                 const ImpairmentConfig& residual,
                                 const ImpairmentConfig& commanded);

// Reported for a perfect mixer instead of -inf so tables stay sortable.
constexpr double kPerfectRejectionDb = -200.0;

// Image rejection ratio in dB from the closed form
//   IMRR = (g^2 + 1 - 2 g cos(theta)) / (g^2 + 1 + 2 g cos(theta)), g = alpha + 1.
double imrr_analytic(const IqImbalance& imb);

struct TonePowers {
    double main_db;   // desired-frequency bin power, dB
    double image_db;  // mirror-frequency bin power, dB
};

// Spectral measurement: synthesize exp(j 2 pi f n), run it through a mixer
// with I-path gain (1 + alpha) and quadrature phase split theta, and read the
// DFT bin powers at +f and -f. tone_cycles must be a whole number of cycles
// inside the window (an integer in [1, n_samples/2)).
TonePowers measure_tone_powers(const IqImbalance& imb, int tone_cycles, int n_samples);

// image_db - main_db from the measurement above; agrees with imrr_analytic
// for every valid (alpha, theta).
double imrr_measured(const IqImbalance& imb, int tone_cycles, int n_samples);

struct CalibrationEntry {
    cplx correction;      // emulated knob; packs (alpha, theta) of the level
    double main_tone_db;  // desired-frequency tone power
    double image_tone_db; // mirror-frequency tone power
    double immr_db;       // image - main
    double dc_level_db;
};

// Emulates the hardware calibration sweep: one measured entry per level,
// sorted by immr_db descending (least rejected first).
std::vector<CalibrationEntry> calibration_sweep(const std::vector<ImpairmentConfig>& levels);

void write_calibration_csv(const std::string& path,
                           const std::vector<CalibrationEntry>& entries);

// Inverts the IMRR closed form along a fixed direction in (alpha, theta)
// space. Directions cycle so a bank of levels covers stretches, shears and
// their signs; a target unreachable within the validity bounds falls back
// to the pure-phase direction (which covers every ratio below 0 dB).
IqImbalance iq_level_for_imrr(double immr_db, int direction);

// count levels with IMRR targets evenly spaced over [immr_lo_db, immr_hi_db].
std::vector<ImpairmentConfig> make_iq_bank(int count, double immr_lo_db, double immr_hi_db);

// count DC levels: magnitudes evenly spaced over (0, max_magnitude], phases
// cycling through eight directions.
std::vector<ImpairmentConfig> make_dc_bank(int count, double max_magnitude);

struct ResidualModel {
    double alpha_sigma = 0.0;
    double theta_sigma = 0.0;
    double dc_sigma = 0.0;  // E|offset|^2 = dc_sigma^2
};

// Small per-device manufacturing draw.
ImpairmentConfig sample_residual(const ResidualModel& model, Rng& rng);

}  // namespace oracle::impair
