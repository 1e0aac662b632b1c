#include "oracle/impairments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "oracle/errors.hpp"

namespace oracle::impair {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

cplx IqImbalance::mu() const {
    return {std::cos(theta / 2.0), alpha * std::sin(theta / 2.0)};
}

cplx IqImbalance::nu() const {
    return {alpha * std::cos(theta / 2.0), -std::sin(theta / 2.0)};
}

bool IqImbalance::valid() const {
    // theta = pi/2 is degenerate but well-defined and shows up in the
    // 0 dB reference case, so the bound is inclusive.
    return std::isfinite(alpha) && std::isfinite(theta) &&
           std::abs(alpha) < 1.0 && std::abs(theta) <= std::numbers::pi / 2.0;
}

double DcOffset::level_db() const {
    const double mag = std::abs(offset);
    if (mag <= 0.0) return kPerfectRejectionDb;
    return 20.0 * std::log10(mag);
}

std::vector<cplx> apply_iq_imbalance(const std::vector<cplx>& s, const IqImbalance& imb) {
    if (!imb.valid()) throw InvalidInput("apply_iq_imbalance: invalid imbalance");
    const cplx mu = imb.mu();
    const cplx nu = imb.nu();
    std::vector<cplx> out(s.size());
    for (size_t k = 0; k < s.size(); ++k)
        out[k] = mu * s[k] + nu * std::conj(s[k]);
    return out;
}

std::vector<cplx> apply_dc_offset(const std::vector<cplx>& s, const DcOffset& dc) {
    if (!dc.valid()) throw InvalidInput("apply_dc_offset: offset magnitude >= 1");
    std::vector<cplx> out(s.size());
    for (size_t k = 0; k < s.size(); ++k) out[k] = s[k] + dc.offset;
    return out;
}

std::vector<cplx> apply_impairment(const std::vector<cplx>& s, const ImpairmentConfig& cfg) {
    return apply_dc_offset(apply_iq_imbalance(s, cfg.iq), cfg.dc);
}

std::vector<cplx> apply_tx_chain(const std::vector<cplx>& s,
                                 const ImpairmentConfig& residual,
                                 const ImpairmentConfig& commanded) {
    std::vector<cplx> out = apply_iq_imbalance(s, residual.iq);
    out = apply_iq_imbalance(out, commanded.iq);
    const DcOffset total{residual.dc.offset + commanded.dc.offset};
    return apply_dc_offset(out, total);
}

double imrr_analytic(const IqImbalance& imb) {
    if (!imb.valid()) throw InvalidInput("imrr_analytic: invalid imbalance");
    const double g = imb.alpha + 1.0;
    const double c = std::cos(imb.theta);
    const double ratio = (g * g + 1.0 - 2.0 * g * c) / (g * g + 1.0 + 2.0 * g * c);
    if (ratio <= 1e-20) return kPerfectRejectionDb;
    return 10.0 * std::log10(ratio);
}

TonePowers measure_tone_powers(const IqImbalance& imb, int tone_cycles, int n_samples) {
    if (!imb.valid()) throw InvalidInput("measure_tone_powers: invalid imbalance");
    if (n_samples < 1024) throw InvalidInput("measure_tone_powers: need >= 1024 samples");
    if (tone_cycles < 1 || tone_cycles >= n_samples / 2)
        throw InvalidInput("measure_tone_powers: tone must be an integer cycle count below Nyquist");

    // Mixer with I-path gain g = 1 + alpha, Q-path gain 1, and the phase
    // deviation split evenly between the paths. Its baseband equivalent is
    //   s_d = mu_m s + nu_m conj(s)
    // and |nu_m|^2 / |mu_m|^2 reproduces the closed-form IMRR exactly.
    const double g = 1.0 + imb.alpha;
    const double c = std::cos(imb.theta / 2.0);
    const double s = std::sin(imb.theta / 2.0);
    const cplx mu_m{(g + 1.0) * c / 2.0, (g - 1.0) * s / 2.0};
    const cplx nu_m{(g - 1.0) * c / 2.0, -(g + 1.0) * s / 2.0};

    std::vector<cplx> distorted(static_cast<size_t>(n_samples));
    const double w = kTwoPi * static_cast<double>(tone_cycles) / n_samples;
    for (int n = 0; n < n_samples; ++n) {
        const cplx tone{std::cos(w * n), std::sin(w * n)};
        distorted[static_cast<size_t>(n)] = mu_m * tone + nu_m * std::conj(tone);
    }

    // Only two bins are needed, so a direct DFT beats an FFT here.
    // X[k] = sum x[n] exp(-j 2 pi k n / N) / N; the +w tone lands in bin
    // +tone_cycles, its image in -tone_cycles.
    auto bin_power = [&](int k) {
        cplx acc{0.0, 0.0};
        const double wk = -kTwoPi * static_cast<double>(k) / n_samples;
        for (int n = 0; n < n_samples; ++n) {
            const double ph = wk * n;
            acc += distorted[static_cast<size_t>(n)] * cplx{std::cos(ph), std::sin(ph)};
        }
        acc /= static_cast<double>(n_samples);
        return std::norm(acc);
    };

    const double desired = bin_power(tone_cycles);
    const double image = bin_power(-tone_cycles);
    if (desired <= 0.0) throw InvalidInput("measure_tone_powers: degenerate tone");
    TonePowers p;
    p.main_db = 10.0 * std::log10(desired);
    p.image_db = image <= desired * 1e-20 ? p.main_db + kPerfectRejectionDb
                                          : 10.0 * std::log10(image);
    return p;
}

double imrr_measured(const IqImbalance& imb, int tone_cycles, int n_samples) {
    const TonePowers p = measure_tone_powers(imb, tone_cycles, n_samples);
    const double immr = p.image_db - p.main_db;
    return immr <= kPerfectRejectionDb ? kPerfectRejectionDb : immr;
}

std::vector<CalibrationEntry> calibration_sweep(const std::vector<ImpairmentConfig>& levels) {
    if (levels.empty()) throw InvalidInput("calibration_sweep: no levels");
    std::vector<CalibrationEntry> entries(levels.size());
    for (size_t k = 0; k < levels.size(); ++k) {
        const ImpairmentConfig& cfg = levels[k];
        const TonePowers p = measure_tone_powers(cfg.iq, 16, 4096);
        CalibrationEntry e;
        e.correction = {cfg.iq.alpha, cfg.iq.theta};
        e.main_tone_db = p.main_db;
        e.image_tone_db = p.image_db;
        e.immr_db = std::max(p.image_db - p.main_db, kPerfectRejectionDb);
        e.dc_level_db = cfg.dc.level_db();
        entries[k] = e;
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const CalibrationEntry& a, const CalibrationEntry& b) {
                         return a.immr_db > b.immr_db;
                     });
    return entries;
}

void write_calibration_csv(const std::string& path,
                           const std::vector<CalibrationEntry>& entries) {
    std::ofstream out(path);
    if (!out) throw FileError("write_calibration_csv: cannot open " + path);
    out << "correction_real,correction_imag,main_tone_db,image_tone_db,immr_db\n";
    out.precision(10);
    for (const CalibrationEntry& e : entries) {
        out << e.correction.real() << ',' << e.correction.imag() << ','
            << e.main_tone_db << ',' << e.image_tone_db << ',' << e.immr_db << '\n';
    }
}

namespace {

// Direction table for inverting the IMRR form: scale factors applied to
// (alpha, theta) as the level strength grows.
struct Direction {
    double da, dt;
};
constexpr Direction kDirections[] = {
    {0.0, 1.0},  {1.0, 0.0},   {0.0, -1.0},  {-1.0, 0.0},
    {0.7, 0.7},  {0.7, -0.7},  {-0.7, 0.7},  {-0.7, -0.7},
};
constexpr int kDirectionCount = 8;
constexpr double kAlphaMax = 0.85;
constexpr double kThetaMax = 1.45;  // < pi/2

double imrr_ratio(double alpha, double theta) {
    const double g = alpha + 1.0;
    const double c = std::cos(theta);
    return (g * g + 1.0 - 2.0 * g * c) / (g * g + 1.0 + 2.0 * g * c);
}

}  // namespace

IqImbalance iq_level_for_imrr(double immr_db, int direction) {
    if (immr_db >= 0.0) throw InvalidInput("iq_level_for_imrr: target must be < 0 dB");
    const double target = std::pow(10.0, immr_db / 10.0);
    const Direction d = kDirections[direction % kDirectionCount];

    // Largest scale keeping (alpha, theta) inside validity bounds.
    double t_max = 1e30;
    if (d.da != 0.0) t_max = std::min(t_max, kAlphaMax / std::abs(d.da));
    if (d.dt != 0.0) t_max = std::min(t_max, kThetaMax / std::abs(d.dt));

    auto ratio_at = [&](double t) { return imrr_ratio(t * d.da, t * d.dt); };

    if (ratio_at(t_max) < target) {
        // Unreachable along this direction; pure phase always reaches it:
        // IMRR(0, theta) = tan^2(theta/2).
        const double theta = 2.0 * std::atan(std::sqrt(target));
        return IqImbalance{0.0, theta};
    }

    // Scan for a bracket, then bisect. The ratio is monotone along these
    // directions over the bounded range, the scan just makes that robust.
    double lo = 0.0, hi = t_max;
    constexpr int kScan = 256;
    for (int k = 1; k <= kScan; ++k) {
        const double t = t_max * static_cast<double>(k) / kScan;
        if (ratio_at(t) >= target) {
            hi = t;
            lo = t_max * static_cast<double>(k - 1) / kScan;
            break;
        }
    }
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ratio_at(mid) < target) lo = mid; else hi = mid;
    }
    const double t = 0.5 * (lo + hi);
    return IqImbalance{t * d.da, t * d.dt};
}

std::vector<ImpairmentConfig> make_iq_bank(int count, double immr_lo_db, double immr_hi_db) {
    if (count < 1) throw InvalidInput("make_iq_bank: count < 1");
    if (!(immr_lo_db < immr_hi_db) || immr_hi_db >= 0.0)
        throw InvalidInput("make_iq_bank: need immr_lo_db < immr_hi_db < 0");
    std::vector<ImpairmentConfig> bank;
    bank.reserve(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double frac = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        const double target = immr_lo_db + frac * (immr_hi_db - immr_lo_db);
        ImpairmentConfig cfg;
        cfg.iq = iq_level_for_imrr(target, k);
        cfg.label = "iq" + std::to_string(k);
        bank.push_back(std::move(cfg));
    }
    return bank;
}

std::vector<ImpairmentConfig> make_dc_bank(int count, double max_magnitude) {
    if (count < 1) throw InvalidInput("make_dc_bank: count < 1");
    if (!(max_magnitude > 0.0) || max_magnitude >= 1.0)
        throw InvalidInput("make_dc_bank: magnitude must be in (0, 1)");
    std::vector<ImpairmentConfig> bank;
    bank.reserve(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double mag = max_magnitude * static_cast<double>(k + 1) / count;
        const double phase = kTwoPi * static_cast<double>(k % 8) / 8.0 + 0.3;
        ImpairmentConfig cfg;
        cfg.dc.offset = {mag * std::cos(phase), mag * std::sin(phase)};
        cfg.label = "dc" + std::to_string(k);
        bank.push_back(std::move(cfg));
    }
    return bank;
}

ImpairmentConfig sample_residual(const ResidualModel& model, Rng& rng) {
    auto clamp = [](double x, double lim) { return std::clamp(x, -lim, lim); };
    ImpairmentConfig cfg;
    cfg.iq.alpha = clamp(model.alpha_sigma * rng.gaussian(), 0.5);
    cfg.iq.theta = clamp(model.theta_sigma * rng.gaussian(), 0.5);
    cplx dc = rng.cgaussian(model.dc_sigma * model.dc_sigma);
    if (std::abs(dc) > 0.5) dc *= 0.5 / std::abs(dc);
    cfg.dc.offset = dc;
    cfg.label = "residual";
    return cfg;
}

}  // namespace oracle::impair
