#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oracle/baseband.hpp"
#include "oracle/impairments.hpp"

namespace oracle::io {

// One JSON config file is the single source of truth for an experiment;
// every artifact written from it embeds config_hash(cfg).
struct RunConfig {
    int config_version = 1;
    uint64_t seed = 1;

    struct Baseband {
        baseband::Constellation constellation = baseband::Constellation::qpsk;
        int preamble_symbols = 64;
        int payload_symbols = 1024;
        double sample_rate_hz = 5e6;
    } baseband;

    struct Devices {
        int count = 4;
        impair::ResidualModel residual{0.005, 0.005, 0.005};
    } devices;

    struct Channel {
        std::string model = "rayleigh";  // "identity" | "rayleigh"
        double snr_db = 25.0;
        double min_gain = 0.25;
        int sessions = 1;  // independent channel realizations per device
    } channel;

    struct PatternCfg {
        int n_pattern = 64;
    } pattern;

    struct Planner {
        std::vector<double> snr_grid{15, 20, 25, 30, 35, 40};
        double ber_bound = 1e-4;
        double emd_threshold = 0.15;  // T
        int n_required = 16;
        long long bits_per_point = 200000;
        double ref_snr_db = 40.0;
        int iq_levels = 32;
        double iq_imrr_lo_db = -44.0;
        double iq_imrr_hi_db = -9.0;
        int dc_levels = 32;
        double dc_max_magnitude = 0.6;
    } planner;

    struct Classifier {
        int stride = 128;
        int batch_size = 128;
        int max_epochs = 50;
        int patience = 10;
        double learning_rate = 1e-4;
        double l2_lambda = 1e-4;
        double dropout = 0.5;
        double augment_noise_db = -15.0;
        int augment_copies = 2;
        double val_fraction = 0.1;
        std::string input_mode = "raw";  // "raw" | "demod"
    } classifier;

    struct Gen {
        int frames_per_device = 100;
    } gen;
};

// Parse + cross-field validation; throws ConfigError with the offending
// field in the message.
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& cfg);

// Canonical serialization (sorted keys) and its FNV-1a-64 hash as 16 hex
// digits; this is the hash embedded in artifacts.
std::string config_to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

}  // namespace oracle::io
