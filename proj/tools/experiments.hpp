#pragma once

// Experiment orchestration shared by the oraclelab binary and the
// integration/acceptance suites.

#include <string>
#include <vector>

#include "oracle/baseband.hpp"
#include "oracle/config.hpp"
#include "oracle/impairments.hpp"
#include "oracle/planner.hpp"

namespace oracle::cli {

// Per-device manufacturing residual, deterministic from cfg.seed.
std::vector<impair::ImpairmentConfig> device_residuals(const io::RunConfig& cfg);

// Channel realization for a (device, session) pair: identity gain or a
// Rayleigh draw with the configured gain floor, noise at -snr_db.
baseband::ChannelRealization make_channel(const io::RunConfig& cfg, int device, int session);

// frames_per_device random frames through the device chain and channel,
// concatenated into one capture.
baseband::IqTrace generate_trace(const io::RunConfig& cfg,
                                 const impair::ImpairmentConfig& residual,
                                 const impair::ImpairmentConfig& commanded,
                                 int device_label, const baseband::ChannelRealization& ch,
                                 uint64_t stream);

// Per-frame preamble equalization over a concatenated capture; returns the
// demodulated (equalized) payload symbol stream.
std::vector<baseband::cplx> demodulated_stream(const io::RunConfig& cfg,
                                               const baseband::IqTrace& trace);

// The impairment level banks the planner works from.
std::vector<impair::ImpairmentConfig> level_banks(const io::RunConfig& cfg);

plan::MapBuildParams map_params(const io::RunConfig& cfg);
plan::SelectParams select_params(const io::RunConfig& cfg);

// Radios for planning: SNR drawn uniformly from {20, 25, 30} dB, residuals
// from the device model.
std::vector<plan::RadioProfile> planning_radios(const io::RunConfig& cfg, int count);

// Quantile with linear interpolation between closest ranks (the R-7 rule):
// h = (n-1)p, q = x[floor(h)] + frac * (x[floor(h)+1] - x[floor(h)]).
double quantile_linear(std::vector<double> values, double p);

// Subcommands; each returns a process exit code (0 = success).
int cmd_gen(const io::RunConfig& cfg, const std::string& out_dir,
            const std::string& allocation_path = "");
int cmd_calibrate(const io::RunConfig& cfg, const std::string& out_dir);
int cmd_plan(const io::RunConfig& cfg, const std::string& out_dir);
int cmd_train(const io::RunConfig& cfg, const std::string& dataset_path,
              const std::string& out_dir);
int cmd_eval(const io::RunConfig& cfg, const std::string& model_path,
             const std::string& dataset_path, const std::string& out_dir);
int cmd_report(const std::vector<std::string>& report_paths, const std::string& out_dir);

}  // namespace oracle::cli
