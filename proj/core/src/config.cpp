#include "oracle/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracle/errors.hpp"

namespace oracle::io {

using json = nlohmann::json;

namespace {

baseband::Constellation constellation_from(const std::string& name) {
    if (name == "qpsk") return baseband::Constellation::qpsk;
    if (name == "16qam" || name == "qam16") return baseband::Constellation::qam16;
    throw ConfigError("config: unknown constellation '" + name + "'");
}

const char* constellation_name(baseband::Constellation c) {
    return c == baseband::Constellation::qpsk ? "qpsk" : "qam16";
}

template <class T>
T field(const json& j, const char* section, const char* name, T fallback) {
    if (!j.contains(section)) return fallback;
    const json& s = j.at(section);
    if (!s.contains(name)) return fallback;
    try {
        return s.at(name).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: field ") + section + "." + name +
                          " has the wrong type");
    }
}

}  // namespace

RunConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }

    RunConfig cfg;
    try {
        if (j.contains("config_version")) cfg.config_version = j.at("config_version").get<int>();
        if (cfg.config_version != 1)
            throw ConfigError("config: unsupported config_version " +
                              std::to_string(cfg.config_version));
        if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();

        cfg.baseband.constellation = constellation_from(
            field<std::string>(j, "baseband", "constellation", "qpsk"));
        cfg.baseband.preamble_symbols = field(j, "baseband", "preamble_symbols", cfg.baseband.preamble_symbols);
        cfg.baseband.payload_symbols = field(j, "baseband", "payload_symbols", cfg.baseband.payload_symbols);
        cfg.baseband.sample_rate_hz = field(j, "baseband", "sample_rate_hz", cfg.baseband.sample_rate_hz);

        cfg.devices.count = field(j, "devices", "count", cfg.devices.count);
        cfg.devices.residual.alpha_sigma = field(j, "devices", "alpha_sigma", cfg.devices.residual.alpha_sigma);
        cfg.devices.residual.theta_sigma = field(j, "devices", "theta_sigma", cfg.devices.residual.theta_sigma);
        cfg.devices.residual.dc_sigma = field(j, "devices", "dc_sigma", cfg.devices.residual.dc_sigma);

        cfg.channel.model = field<std::string>(j, "channel", "model", cfg.channel.model);
        cfg.channel.snr_db = field(j, "channel", "snr_db", cfg.channel.snr_db);
        cfg.channel.min_gain = field(j, "channel", "min_gain", cfg.channel.min_gain);
        cfg.channel.sessions = field(j, "channel", "sessions", cfg.channel.sessions);

        cfg.pattern.n_pattern = field(j, "pattern", "n_pattern", cfg.pattern.n_pattern);

        cfg.planner.snr_grid = field(j, "planner", "snr_grid", cfg.planner.snr_grid);
        cfg.planner.ber_bound = field(j, "planner", "ber_bound", cfg.planner.ber_bound);
        cfg.planner.emd_threshold = field(j, "planner", "emd_threshold", cfg.planner.emd_threshold);
        cfg.planner.n_required = field(j, "planner", "n_required", cfg.planner.n_required);
        cfg.planner.bits_per_point = field(j, "planner", "bits_per_point", cfg.planner.bits_per_point);
        cfg.planner.ref_snr_db = field(j, "planner", "ref_snr_db", cfg.planner.ref_snr_db);
        cfg.planner.iq_levels = field(j, "planner", "iq_levels", cfg.planner.iq_levels);
        cfg.planner.iq_imrr_lo_db = field(j, "planner", "iq_imrr_lo_db", cfg.planner.iq_imrr_lo_db);
        cfg.planner.iq_imrr_hi_db = field(j, "planner", "iq_imrr_hi_db", cfg.planner.iq_imrr_hi_db);
        cfg.planner.dc_levels = field(j, "planner", "dc_levels", cfg.planner.dc_levels);
        cfg.planner.dc_max_magnitude = field(j, "planner", "dc_max_magnitude", cfg.planner.dc_max_magnitude);

        cfg.classifier.stride = field(j, "classifier", "stride", cfg.classifier.stride);
        cfg.classifier.batch_size = field(j, "classifier", "batch_size", cfg.classifier.batch_size);
        cfg.classifier.max_epochs = field(j, "classifier", "max_epochs", cfg.classifier.max_epochs);
        cfg.classifier.patience = field(j, "classifier", "patience", cfg.classifier.patience);
        cfg.classifier.learning_rate = field(j, "classifier", "learning_rate", cfg.classifier.learning_rate);
        cfg.classifier.l2_lambda = field(j, "classifier", "l2_lambda", cfg.classifier.l2_lambda);
        cfg.classifier.dropout = field(j, "classifier", "dropout", cfg.classifier.dropout);
        cfg.classifier.augment_noise_db = field(j, "classifier", "augment_noise_db", cfg.classifier.augment_noise_db);
        cfg.classifier.augment_copies = field(j, "classifier", "augment_copies", cfg.classifier.augment_copies);
        cfg.classifier.val_fraction = field(j, "classifier", "val_fraction", cfg.classifier.val_fraction);
        cfg.classifier.input_mode = field<std::string>(j, "classifier", "input_mode", cfg.classifier.input_mode);

        cfg.gen.frames_per_device = field(j, "gen", "frames_per_device", cfg.gen.frames_per_device);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

void validate(const RunConfig& cfg) {
    auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };

    if (cfg.baseband.preamble_symbols < 8) fail("baseband.preamble_symbols must be >= 8");
    if (cfg.baseband.payload_symbols < 1) fail("baseband.payload_symbols must be >= 1");
    if (cfg.baseband.sample_rate_hz <= 0) fail("baseband.sample_rate_hz must be positive");

    if (cfg.devices.count < 1) fail("devices.count must be >= 1");
    if (cfg.devices.residual.alpha_sigma < 0 || cfg.devices.residual.theta_sigma < 0 ||
        cfg.devices.residual.dc_sigma < 0)
        fail("devices residual sigmas must be non-negative");

    if (cfg.channel.model != "identity" && cfg.channel.model != "rayleigh")
        fail("channel.model must be 'identity' or 'rayleigh'");
    if (std::isnan(cfg.channel.snr_db)) fail("channel.snr_db must not be NaN");
    if (cfg.channel.min_gain < 0 || cfg.channel.min_gain >= 1) fail("channel.min_gain must be in [0, 1)");
    if (cfg.channel.sessions < 1) fail("channel.sessions must be >= 1");

    if (cfg.pattern.n_pattern < 4) fail("pattern.n_pattern must be >= 4");

    const auto& p = cfg.planner;
    if (p.snr_grid.empty()) fail("planner.snr_grid must not be empty");
    for (size_t i = 1; i < p.snr_grid.size(); ++i)
        if (p.snr_grid[i] <= p.snr_grid[i - 1]) fail("planner.snr_grid must be strictly ascending");
    if (p.ber_bound <= 0 || p.ber_bound > 1) fail("planner.ber_bound must be in (0, 1]");
    if (p.emd_threshold <= 0) fail("planner.emd_threshold must be positive");
    if (p.n_required < 1) fail("planner.n_required must be >= 1");
    if (static_cast<double>(p.bits_per_point) < 10.0 / p.ber_bound)
        fail("planner.bits_per_point too small to resolve ber_bound (need >= 10/ber_bound)");
    if (p.iq_levels < 0 || p.dc_levels < 0) fail("planner level counts must be non-negative");
    if (p.iq_levels + p.dc_levels < p.n_required)
        fail("planner level banks smaller than n_required");
    if (p.iq_levels > 0 && !(p.iq_imrr_lo_db < p.iq_imrr_hi_db && p.iq_imrr_hi_db < 0))
        fail("planner IQ IMRR range must satisfy lo < hi < 0");
    if (p.dc_levels > 0 && !(p.dc_max_magnitude > 0 && p.dc_max_magnitude < 1))
        fail("planner.dc_max_magnitude must be in (0, 1)");

    const auto& c = cfg.classifier;
    if (c.stride < 1) fail("classifier.stride must be >= 1");
    if (c.batch_size < 1) fail("classifier.batch_size must be >= 1");
    if (c.max_epochs < 1) fail("classifier.max_epochs must be >= 1");
    if (c.patience < 1) fail("classifier.patience must be >= 1");
    if (c.learning_rate <= 0) fail("classifier.learning_rate must be positive");
    if (c.l2_lambda < 0) fail("classifier.l2_lambda must be non-negative");
    if (c.dropout < 0 || c.dropout >= 1) fail("classifier.dropout must be in [0, 1)");
    if (c.augment_copies < 0) fail("classifier.augment_copies must be non-negative");
    if (c.augment_copies > 0 && c.augment_noise_db > -13.0)
        fail("classifier.augment_noise_db must be <= -13 dB when augmentation is enabled");
    if (c.val_fraction <= 0 || c.val_fraction >= 1) fail("classifier.val_fraction must be in (0, 1)");
    if (c.input_mode != "raw" && c.input_mode != "demod")
        fail("classifier.input_mode must be 'raw' or 'demod'");

    if (cfg.gen.frames_per_device < 1) fail("gen.frames_per_device must be >= 1");
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["config_version"] = cfg.config_version;
    j["seed"] = cfg.seed;
    j["baseband"] = json{{"constellation", constellation_name(cfg.baseband.constellation)},
                         {"preamble_symbols", cfg.baseband.preamble_symbols},
                         {"payload_symbols", cfg.baseband.payload_symbols},
                         {"sample_rate_hz", cfg.baseband.sample_rate_hz}};
    j["devices"] = json{{"count", cfg.devices.count},
                        {"alpha_sigma", cfg.devices.residual.alpha_sigma},
                        {"theta_sigma", cfg.devices.residual.theta_sigma},
                        {"dc_sigma", cfg.devices.residual.dc_sigma}};
    j["channel"] = json{{"model", cfg.channel.model},
                        {"snr_db", cfg.channel.snr_db},
                        {"min_gain", cfg.channel.min_gain},
                        {"sessions", cfg.channel.sessions}};
    j["pattern"] = json{{"n_pattern", cfg.pattern.n_pattern}};
    j["planner"] = json{{"snr_grid", cfg.planner.snr_grid},
                        {"ber_bound", cfg.planner.ber_bound},
                        {"emd_threshold", cfg.planner.emd_threshold},
                        {"n_required", cfg.planner.n_required},
                        {"bits_per_point", cfg.planner.bits_per_point},
                        {"ref_snr_db", cfg.planner.ref_snr_db},
                        {"iq_levels", cfg.planner.iq_levels},
                        {"iq_imrr_lo_db", cfg.planner.iq_imrr_lo_db},
                        {"iq_imrr_hi_db", cfg.planner.iq_imrr_hi_db},
                        {"dc_levels", cfg.planner.dc_levels},
                        {"dc_max_magnitude", cfg.planner.dc_max_magnitude}};
    j["classifier"] = json{{"stride", cfg.classifier.stride},
                           {"batch_size", cfg.classifier.batch_size},
                           {"max_epochs", cfg.classifier.max_epochs},
                           {"patience", cfg.classifier.patience},
                           {"learning_rate", cfg.classifier.learning_rate},
                           {"l2_lambda", cfg.classifier.l2_lambda},
                           {"dropout", cfg.classifier.dropout},
                           {"augment_noise_db", cfg.classifier.augment_noise_db},
                           {"augment_copies", cfg.classifier.augment_copies},
                           {"val_fraction", cfg.classifier.val_fraction},
                           {"input_mode", cfg.classifier.input_mode}};
    j["gen"] = json{{"frames_per_device", cfg.gen.frames_per_device}};
    return j.dump(2);
}

std::string config_hash(const RunConfig& cfg) {
    const std::string text = config_to_json(cfg);
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : text) {
        h ^= static_cast<uint8_t>(ch);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace oracle::io
