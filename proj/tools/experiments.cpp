#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracle/cnn.hpp"
#include "oracle/datastore.hpp"
#include "oracle/errors.hpp"
#include "oracle/parallel.hpp"
#include "oracle/rng.hpp"
#include "oracle/similarity.hpp"

namespace oracle::cli {

using json = nlohmann::json;
namespace bb = oracle::baseband;
namespace fs = std::filesystem;

namespace {

constexpr uint64_t kResidualStream = 0x72657369ULL;
constexpr uint64_t kChannelStream = 0x6368616eULL;
constexpr uint64_t kRadioStream = 0x72616469ULL;

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FileError("cannot open " + path + " for writing");
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::vector<impair::ImpairmentConfig> device_residuals(const io::RunConfig& cfg) {
    std::vector<impair::ImpairmentConfig> out(static_cast<size_t>(cfg.devices.count));
    for (int d = 0; d < cfg.devices.count; ++d) {
        Rng rng(cfg.seed, kResidualStream + static_cast<uint64_t>(d));
        out[static_cast<size_t>(d)] = impair::sample_residual(cfg.devices.residual, rng);
        out[static_cast<size_t>(d)].label = "residual-d" + std::to_string(d);
    }
    return out;
}

bb::ChannelRealization make_channel(const io::RunConfig& cfg, int device, int session) {
    bb::ChannelRealization ch;
    const uint64_t key = mix64(kChannelStream ^ (static_cast<uint64_t>(device) << 20) ^
                               static_cast<uint64_t>(session));
    if (cfg.channel.model == "rayleigh") {
        Rng rng(cfg.seed, key);
        ch.gain = bb::sample_rayleigh_gain(rng, cfg.channel.min_gain);
    } else {
        ch.gain = {1.0, 0.0};
    }
    ch.noise_power_db = -cfg.channel.snr_db;
    ch.seed = mix64(cfg.seed) ^ key;
    return ch;
}

bb::IqTrace generate_trace(const io::RunConfig& cfg,
                           const impair::ImpairmentConfig& residual,
                           const impair::ImpairmentConfig& commanded,
                           int device_label, const bb::ChannelRealization& ch,
                           uint64_t stream) {
    const std::vector<bb::cplx> preamble =
        bb::make_preamble(cfg.seed, cfg.baseband.preamble_symbols);

    bb::IqTrace trace;
    trace.sample_rate_hz = cfg.baseband.sample_rate_hz;
    trace.device_label = device_label;
    trace.impairment.label = commanded.identity() ? residual.label : commanded.label;
    trace.samples.reserve(static_cast<size_t>(cfg.gen.frames_per_device) *
                          static_cast<size_t>(cfg.baseband.preamble_symbols +
                                              cfg.baseband.payload_symbols));
    for (int f = 0; f < cfg.gen.frames_per_device; ++f) {
        Rng frame_rng(cfg.seed, mix64(stream) + static_cast<uint64_t>(f));
        const bb::Frame frame = bb::make_frame(preamble, cfg.baseband.payload_symbols,
                                               cfg.baseband.constellation, frame_rng);
        const std::vector<bb::cplx> tx =
            impair::apply_tx_chain(frame.samples(), residual, commanded);
        trace.samples.insert(trace.samples.end(), tx.begin(), tx.end());
    }
    return bb::apply_channel(trace, ch);
}

std::vector<bb::cplx> demodulated_stream(const io::RunConfig& cfg, const bb::IqTrace& trace) {
    const std::vector<bb::cplx> preamble =
        bb::make_preamble(cfg.seed, cfg.baseband.preamble_symbols);
    const size_t frame_len =
        static_cast<size_t>(cfg.baseband.preamble_symbols + cfg.baseband.payload_symbols);
    if (trace.samples.size() % frame_len != 0)
        throw InvalidInput("demodulated_stream: trace is not a whole number of frames");

    std::vector<bb::cplx> symbols;
    symbols.reserve(trace.samples.size() / frame_len *
                    static_cast<size_t>(cfg.baseband.payload_symbols));
    for (size_t off = 0; off < trace.samples.size(); off += frame_len) {
        const std::vector<bb::cplx> frame(trace.samples.begin() + static_cast<std::ptrdiff_t>(off),
                                          trace.samples.begin() + static_cast<std::ptrdiff_t>(off + frame_len));
        const bb::Equalized eq = bb::estimate_and_equalize(frame, preamble);
        symbols.insert(symbols.end(), eq.symbols.begin(), eq.symbols.end());
    }
    return symbols;
}

std::vector<impair::ImpairmentConfig> level_banks(const io::RunConfig& cfg) {
    std::vector<impair::ImpairmentConfig> levels;
    if (cfg.planner.iq_levels > 0) {
        auto iq = impair::make_iq_bank(cfg.planner.iq_levels, cfg.planner.iq_imrr_lo_db,
                                       cfg.planner.iq_imrr_hi_db);
        levels.insert(levels.end(), iq.begin(), iq.end());
    }
    if (cfg.planner.dc_levels > 0) {
        auto dc = impair::make_dc_bank(cfg.planner.dc_levels, cfg.planner.dc_max_magnitude);
        levels.insert(levels.end(), dc.begin(), dc.end());
    }
    return levels;
}

plan::MapBuildParams map_params(const io::RunConfig& cfg) {
    plan::MapBuildParams p;
    p.snr_grid = cfg.planner.snr_grid;
    p.bits_per_point = cfg.planner.bits_per_point;
    p.ber_bound = cfg.planner.ber_bound;
    p.constellation = cfg.baseband.constellation;
    p.preamble_symbols = cfg.baseband.preamble_symbols;
    p.payload_symbols = std::min(cfg.baseband.payload_symbols, 512);
    p.seed = cfg.seed;
    return p;
}

plan::SelectParams select_params(const io::RunConfig& cfg) {
    plan::SelectParams s;
    s.n_required = cfg.planner.n_required;
    s.emd_threshold = cfg.planner.emd_threshold;
    s.ref_snr_db = cfg.planner.ref_snr_db;
    s.ber_bound = cfg.planner.ber_bound;
    s.pattern.n_pattern = cfg.pattern.n_pattern;
    s.pattern.preamble_symbols = cfg.baseband.preamble_symbols;
    s.pattern.payload_symbols = std::max(cfg.pattern.n_pattern, 256);
    s.pattern.seed = cfg.seed;
    s.pattern.constellation = cfg.baseband.constellation;
    return s;
}

std::vector<plan::RadioProfile> planning_radios(const io::RunConfig& cfg, int count) {
    static constexpr double kSnrChoices[] = {20.0, 25.0, 30.0};
    const std::vector<impair::ImpairmentConfig> residuals = device_residuals(cfg);
    std::vector<plan::RadioProfile> radios(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng rng(cfg.seed, kRadioStream + static_cast<uint64_t>(i));
        plan::RadioProfile& r = radios[static_cast<size_t>(i)];
        r.id = i;
        r.snr_db = kSnrChoices[rng.below(3)];
        r.residual = residuals[static_cast<size_t>(i) % residuals.size()];
    }
    return radios;
}

double quantile_linear(std::vector<double> values, double p) {
    if (values.empty()) throw InvalidInput("quantile_linear: empty input");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - std::floor(h);
    return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

// Windows for one trace in the configured input mode.
std::vector<cnn::IqWindow> trace_windows(const io::RunConfig& cfg, const bb::IqTrace& trace) {
    if (cfg.classifier.input_mode == "raw")
        return cnn::make_windows(trace, cfg.classifier.stride);
    return cnn::make_symbol_windows(demodulated_stream(cfg, trace), cfg.classifier.stride,
                                    trace.device_label);
}

struct SplitSet {
    std::vector<cnn::IqWindow> train, val;
    int n_classes = 0;
};

// Stratified, seeded split; augmentation copies are appended to train only.
SplitSet split_and_augment(const io::RunConfig& cfg, std::vector<cnn::IqWindow> windows) {
    int max_label = 0;
    for (const auto& w : windows) max_label = std::max(max_label, w.label);
    const int n_classes = max_label + 1;

    SplitSet out;
    out.n_classes = n_classes;
    std::vector<std::vector<size_t>> per_class(static_cast<size_t>(n_classes));
    for (size_t i = 0; i < windows.size(); ++i)
        per_class[static_cast<size_t>(windows[i].label)].push_back(i);

    for (int c = 0; c < n_classes; ++c) {
        auto& idx = per_class[static_cast<size_t>(c)];
        if (idx.empty())
            throw InvalidInput("split_and_augment: class " + std::to_string(c) + " has no windows");
        Rng rng(cfg.seed, 0x73706c74ULL + static_cast<uint64_t>(c));
        for (size_t k = idx.size(); k > 1; --k)
            std::swap(idx[k - 1], idx[static_cast<size_t>(rng.below(k))]);
        size_t val_n = static_cast<size_t>(
            std::max(1.0, std::floor(cfg.classifier.val_fraction * static_cast<double>(idx.size()))));
        val_n = std::min(val_n, idx.size() - 1);
        for (size_t k = 0; k < idx.size(); ++k) {
            if (k < val_n) out.val.push_back(windows[idx[k]]);
            else out.train.push_back(windows[idx[k]]);
        }
    }

    const size_t base = out.train.size();
    for (int copy = 1; copy <= cfg.classifier.augment_copies; ++copy) {
        const std::vector<cnn::IqWindow> extra =
            cnn::augment(std::vector<cnn::IqWindow>(out.train.begin(),
                                                    out.train.begin() + static_cast<std::ptrdiff_t>(base)),
                         cfg.classifier.augment_noise_db,
                         mix64(cfg.seed) + static_cast<uint64_t>(copy));
        out.train.insert(out.train.end(), extra.begin(), extra.end());
    }
    return out;
}

cnn::Arch arch_for(const io::RunConfig& cfg, int n_classes) {
    (void)cfg;
    cnn::Arch a;
    a.input_w = cnn::kWindowLen;
    a.n_classes = n_classes;
    return a;
}

cnn::Hyper hyper_for(const io::RunConfig& cfg) {
    cnn::Hyper h;
    h.learning_rate = cfg.classifier.learning_rate;
    h.l2_lambda = cfg.classifier.l2_lambda;
    h.dropout = cfg.classifier.dropout;
    return h;
}

cnn::TrainRecipe recipe_for(const io::RunConfig& cfg) {
    cnn::TrainRecipe r;
    r.batch_size = cfg.classifier.batch_size;
    r.max_epochs = cfg.classifier.max_epochs;
    r.patience = cfg.classifier.patience;
    r.seed = cfg.seed;
    r.augment_bound_db = std::min(cfg.classifier.augment_noise_db, -13.0);
    return r;
}

json confusion_to_json(const cnn::ConfusionMatrix& cm) {
    json rows = json::array();
    for (int t = 0; t < cm.n_classes; ++t) {
        json row = json::array();
        for (int p = 0; p < cm.n_classes; ++p) row.push_back(cm.at(t, p));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

int cmd_gen(const io::RunConfig& cfg, const std::string& out_dir,
            const std::string& allocation_path) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    const std::string hash = io::config_hash(cfg);

    // Commanded impairment per device: identity unless an allocation says
    // otherwise.
    std::vector<impair::ImpairmentConfig> commanded(
        static_cast<size_t>(cfg.devices.count));
    if (!allocation_path.empty()) {
        json j;
        try {
            j = json::parse(read_text(allocation_path));
        } catch (const json::exception& e) {
            throw FormatError(std::string("allocation: not valid JSON: ") + e.what());
        }
        for (const json& a : j.at("assigned")) {
            const int radio = a.at("radio").get<int>();
            if (radio < 0 || radio >= cfg.devices.count) continue;
            impair::ImpairmentConfig c;
            c.iq.alpha = a.at("alpha").get<double>();
            c.iq.theta = a.at("theta").get<double>();
            c.dc.offset = {a.at("dc_re").get<double>(), a.at("dc_im").get<double>()};
            c.label = a.at("impairment").get<std::string>();
            commanded[static_cast<size_t>(radio)] = c;
        }
    }

    const std::vector<impair::ImpairmentConfig> residuals = device_residuals(cfg);
    const int sessions = cfg.channel.sessions;
    std::vector<bb::IqTrace> traces(static_cast<size_t>(cfg.devices.count) *
                                    static_cast<size_t>(sessions));
    parallel_for(traces.size(), [&](size_t i) {
        const int d = static_cast<int>(i) / sessions;
        const int s = static_cast<int>(i) % sessions;
        const bb::ChannelRealization ch = make_channel(cfg, d, s);
        traces[i] = generate_trace(cfg, residuals[static_cast<size_t>(d)],
                                   commanded[static_cast<size_t>(d)], d, ch,
                                   mix64(static_cast<uint64_t>(d) << 24 ^
                                         static_cast<uint64_t>(s)));
    });

    const std::string path = (fs::path(out_dir) / "dataset.orcl").string();
    io::save_dataset(path, traces, hash);

    json report;
    report["kind"] = "experiment_report";
    report["experiment_id"] = "gen";
    report["config_hash"] = hash;
    report["metrics"] = json{{"traces", traces.size()},
                             {"devices", cfg.devices.count},
                             {"sessions", sessions},
                             {"samples_per_trace", traces.empty() ? 0 : traces[0].samples.size()}};
    report["timings"] = json{{"total_s", elapsed_s(t0)}};
    write_text((fs::path(out_dir) / "gen_report.json").string(), report.dump(2));
    std::cout << "gen: wrote " << traces.size() << " traces to " << path << "\n";
    return 0;
}

int cmd_calibrate(const io::RunConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    const std::vector<impair::ImpairmentConfig> levels = level_banks(cfg);
    const std::vector<impair::CalibrationEntry> entries = impair::calibration_sweep(levels);
    const std::string path = (fs::path(out_dir) / "calibration.csv").string();
    impair::write_calibration_csv(path, entries);

    json report;
    report["kind"] = "experiment_report";
    report["experiment_id"] = "calibrate";
    report["config_hash"] = io::config_hash(cfg);
    report["metrics"] = json{{"levels", entries.size()},
                             {"immr_min_db", entries.empty() ? 0.0 : entries.back().immr_db},
                             {"immr_max_db", entries.empty() ? 0.0 : entries.front().immr_db}};
    report["timings"] = json{{"total_s", elapsed_s(t0)}};
    write_text((fs::path(out_dir) / "calibrate_report.json").string(), report.dump(2));
    std::cout << "calibrate: wrote " << entries.size() << " rows to " << path << "\n";
    return 0;
}

int cmd_plan(const io::RunConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    const std::string hash = io::config_hash(cfg);
    const std::string map_path = (fs::path(out_dir) / "map.json").string();

    // The Monte Carlo map is the expensive artifact; reuse a cached one
    // only when it came from the same config.
    plan::ImpairmentMap map;
    bool reused = false;
    if (fs::exists(map_path)) {
        try {
            std::string stored_hash;
            plan::ImpairmentMap cached =
                plan::impairment_map_from_json(read_text(map_path), &stored_hash);
            if (stored_hash == hash) {
                map = std::move(cached);
                reused = true;
            }
        } catch (const FileError&) {
            // unreadable cache: rebuild
        }
    }
    const double map_started = elapsed_s(t0);
    if (!reused) {
        map = plan::build_impairment_map(level_banks(cfg), map_params(cfg));
        write_text(map_path, plan::impairment_map_to_json(map, hash));
    }
    const double map_s = elapsed_s(t0) - map_started;

    const plan::FeasibleSet set = plan::select_feasible(map, select_params(cfg));
    write_text((fs::path(out_dir) / "feasible_set.json").string(),
               plan::feasible_set_to_json(set, hash));

    // Pairwise EMD between member patterns; the off-diagonal floor is the
    // separation the selection promised.
    {
        std::vector<pattern::Pattern> pats;
        std::vector<pattern::PatternLabel> labels;
        for (const plan::FeasibleMember& m : set.members) {
            pats.push_back(m.pat);
            labels.push_back({0, 0, m.config.label});
        }
        pattern::write_emd_csv((fs::path(out_dir) / "feasible_emd.csv").string(),
                               pattern::emd_matrix(pats, labels));
    }

    const std::vector<plan::RadioProfile> radios = planning_radios(cfg, cfg.devices.count);
    const plan::Allocation greedy =
        plan::allocate_greedy(radios, set, map, cfg.planner.ber_bound);
    write_text((fs::path(out_dir) / "allocation.json").string(),
               plan::allocation_to_json(greedy, set, radios, hash));
    plan::write_plan_csv((fs::path(out_dir) / "plan.csv").string(), greedy, radios, set);

    const plan::Allocation random_alloc =
        plan::allocate_random(radios, set, map, cfg.seed);
    write_text((fs::path(out_dir) / "allocation_random.json").string(),
               plan::allocation_to_json(random_alloc, set, radios, hash));

    // Greedy-vs-random mean total BER over fresh SNR assignments.
    constexpr int kAssignments = 200;
    constexpr int kRandomPerAssignment = 100;
    static constexpr double kSnrChoices[] = {20.0, 25.0, 30.0};
    json ber_rows = json::array();
    std::ostringstream ber_csv;
    ber_csv << "radios,mean_total_ber_random,mean_total_ber_greedy\n";
    for (const int r_count : {4, 8, 12, 16}) {
        if (static_cast<size_t>(r_count) > set.size()) break;
        double greedy_sum = 0.0, random_sum = 0.0;
        for (int a = 0; a < kAssignments; ++a) {
            std::vector<plan::RadioProfile> rs(static_cast<size_t>(r_count));
            Rng rng(cfg.seed, mix64(0xbe72ULL + static_cast<uint64_t>(a)) +
                                  static_cast<uint64_t>(r_count));
            for (int i = 0; i < r_count; ++i) {
                rs[static_cast<size_t>(i)].id = i;
                rs[static_cast<size_t>(i)].snr_db = kSnrChoices[rng.below(3)];
            }
            greedy_sum +=
                plan::total_ber(plan::allocate_greedy(rs, set, map, cfg.planner.ber_bound));
            double rnd = 0.0;
            for (int b = 0; b < kRandomPerAssignment; ++b)
                rnd += plan::total_ber(plan::allocate_random(
                    rs, set, map, mix64(cfg.seed + 17) + static_cast<uint64_t>(a * 1000 + b)));
            random_sum += rnd / kRandomPerAssignment;
        }
        const double mean_greedy = greedy_sum / kAssignments;
        const double mean_random = random_sum / kAssignments;
        ber_rows.push_back(json{{"radios", r_count},
                                {"mean_total_ber_random", mean_random},
                                {"mean_total_ber_greedy", mean_greedy}});
        ber_csv.precision(6);
        ber_csv << r_count << ',' << mean_random << ',' << mean_greedy << '\n';
    }
    write_text((fs::path(out_dir) / "ber_comparison.csv").string(), ber_csv.str());

    json report;
    report["kind"] = "experiment_report";
    report["experiment_id"] = "plan";
    report["config_hash"] = hash;
    report["metrics"] = json{{"feasible_members", set.size()},
                             {"classifiable", greedy.classifiable.size()},
                             {"unclassifiable", greedy.unclassifiable.size()},
                             {"greedy_total_ber", plan::total_ber(greedy)},
                             {"random_total_ber", plan::total_ber(random_alloc)},
                             {"ber_comparison", ber_rows},
                             {"map_reused", reused}};
    report["timings"] = json{{"map_s", map_s}, {"total_s", elapsed_s(t0)}};
    write_text((fs::path(out_dir) / "plan_report.json").string(), report.dump(2));
    std::cout << "plan: " << set.size() << " feasible members, "
              << greedy.classifiable.size() << " classifiable radios\n";
    return 0;
}

int cmd_train(const io::RunConfig& cfg, const std::string& dataset_path,
              const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    const std::string hash = io::config_hash(cfg);

    const io::LoadedDataset ds = io::load_dataset(dataset_path);
    if (ds.config_hash != hash)
        std::cerr << "warning: dataset config hash " << ds.config_hash
                  << " differs from current config " << hash << "\n";

    std::vector<cnn::IqWindow> windows;
    for (const bb::IqTrace& t : ds.traces) {
        const std::vector<cnn::IqWindow> w = trace_windows(cfg, t);
        windows.insert(windows.end(), w.begin(), w.end());
    }
    SplitSet split = split_and_augment(cfg, std::move(windows));

    const cnn::Arch arch = arch_for(cfg, split.n_classes);
    const cnn::TrainResult result =
        cnn::train(arch, hyper_for(cfg), split.train, split.val, recipe_for(cfg));

    const std::string model_path = (fs::path(out_dir) / "model.orcl").string();
    io::save_model(model_path, result.model, hash);

    std::ostringstream log_csv;
    log_csv << "epoch,train_loss,val_accuracy\n";
    log_csv.precision(8);
    for (const cnn::EpochStats& e : result.log)
        log_csv << e.epoch << ',' << e.train_loss << ',' << e.val_accuracy << '\n';
    write_text((fs::path(out_dir) / "training_log.csv").string(), log_csv.str());

    json report;
    report["kind"] = "experiment_report";
    report["experiment_id"] = "train";
    report["config_hash"] = hash;
    report["metrics"] = json{{"n_classes", split.n_classes},
                             {"train_windows", split.train.size()},
                             {"val_windows", split.val.size()},
                             {"best_epoch", result.best_epoch},
                             {"best_val_accuracy", result.best_val_accuracy},
                             {"epochs_run", result.log.size()}};
    report["timings"] = json{{"total_s", elapsed_s(t0)}};
    write_text((fs::path(out_dir) / "train_report.json").string(), report.dump(2));
    std::cout << "train: best val accuracy " << result.best_val_accuracy << " at epoch "
              << result.best_epoch << ", model at " << model_path << "\n";
    return 0;
}

int cmd_eval(const io::RunConfig& cfg, const std::string& model_path,
             const std::string& dataset_path, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    const std::string hash = io::config_hash(cfg);

    const io::LoadedModel lm = io::load_model(model_path);
    if (lm.config_hash != hash)
        std::cerr << "warning: model config hash " << lm.config_hash
                  << " differs from current config " << hash << "\n";
    const io::LoadedDataset ds = io::load_dataset(dataset_path);
    if (ds.config_hash != hash)
        std::cerr << "warning: dataset config hash " << ds.config_hash
                  << " differs from current config " << hash << "\n";

    std::vector<cnn::IqWindow> windows;
    for (const bb::IqTrace& t : ds.traces) {
        const std::vector<cnn::IqWindow> w = trace_windows(cfg, t);
        windows.insert(windows.end(), w.begin(), w.end());
    }
    const cnn::ConfusionMatrix cm = cnn::evaluate(lm.model, windows);
    cnn::write_confusion_csv((fs::path(out_dir) / "confusion.csv").string(), cm);

    json report;
    report["kind"] = "experiment_report";
    report["experiment_id"] = "eval";
    report["config_hash"] = hash;
    report["metrics"] = json{{"accuracy", cm.accuracy()},
                             {"n_classes", cm.n_classes},
                             {"windows", windows.size()},
                             {"confusion", confusion_to_json(cm)}};
    report["timings"] = json{{"total_s", elapsed_s(t0)}};
    write_text((fs::path(out_dir) / "eval_report.json").string(), report.dump(2));
    std::cout << "eval: accuracy " << cm.accuracy() << " over " << windows.size()
              << " windows\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& report_paths, const std::string& out_dir) {
    if (report_paths.empty()) throw InvalidInput("report: need at least one report file");
    fs::create_directories(out_dir);

    std::vector<json> reports;
    std::string first_hash;
    for (const std::string& p : report_paths) {
        json j;
        try {
            j = json::parse(read_text(p));
        } catch (const json::exception& e) {
            throw FormatError("report: " + p + " is not valid JSON: " + e.what());
        }
        if (j.value("kind", "") != "experiment_report")
            throw FormatError("report: " + p + " is not an experiment report");
        const std::string h = j.value("config_hash", "");
        if (first_hash.empty()) first_hash = h;
        else if (h != first_hash)
            std::cerr << "warning: mixed config hashes across reports (" << first_hash
                      << " vs " << h << " in " << p << ")\n";
        reports.push_back(std::move(j));
    }

    // Accuracy box stats per class count, quartiles by linear interpolation.
    std::map<int, std::vector<double>> acc_by_classes;
    for (const json& r : reports)
        if (r.at("experiment_id") == "eval")
            acc_by_classes[r.at("metrics").at("n_classes").get<int>()].push_back(
                r.at("metrics").at("accuracy").get<double>());

    std::ostringstream box;
    box << "device_count,min,q1,median,q3,max,runs\n";
    box.precision(8);
    json box_rows = json::array();
    for (const auto& [classes, accs] : acc_by_classes) {
        const double lo = *std::min_element(accs.begin(), accs.end());
        const double hi = *std::max_element(accs.begin(), accs.end());
        const double q1 = quantile_linear(accs, 0.25);
        const double q2 = quantile_linear(accs, 0.5);
        const double q3 = quantile_linear(accs, 0.75);
        box << classes << ',' << lo << ',' << q1 << ',' << q2 << ',' << q3 << ',' << hi
            << ',' << accs.size() << '\n';
        box_rows.push_back(json{{"device_count", classes}, {"min", lo}, {"q1", q1},
                                {"median", q2}, {"q3", q3}, {"max", hi},
                                {"runs", accs.size()}});
    }
    write_text((fs::path(out_dir) / "accuracy_box.csv").string(), box.str());

    // Merge greedy-vs-random tables from plan reports.
    std::ostringstream ber;
    ber << "radios,mean_total_ber_random,mean_total_ber_greedy\n";
    ber.precision(8);
    json ber_rows = json::array();
    for (const json& r : reports) {
        if (r.at("experiment_id") != "plan") continue;
        for (const json& row : r.at("metrics").at("ber_comparison")) {
            ber << row.at("radios").get<int>() << ','
                << row.at("mean_total_ber_random").get<double>() << ','
                << row.at("mean_total_ber_greedy").get<double>() << '\n';
            ber_rows.push_back(row);
        }
    }
    write_text((fs::path(out_dir) / "ber_table.csv").string(), ber.str());

    json summary;
    summary["kind"] = "experiment_report";
    summary["experiment_id"] = "report";
    summary["config_hash"] = first_hash;
    summary["metrics"] = json{{"inputs", report_paths.size()},
                              {"accuracy_box", box_rows},
                              {"ber_comparison", ber_rows}};
    write_text((fs::path(out_dir) / "report_summary.json").string(), summary.dump(2));
    std::cout << "report: aggregated " << report_paths.size() << " reports\n";
    return 0;
}

}  // namespace oracle::cli
