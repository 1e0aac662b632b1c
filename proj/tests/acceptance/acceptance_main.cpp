// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Scaled desk experiments; every threshold is pinned here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "oracle/cnn.hpp"
#include "oracle/cnn_kernels.hpp"
#include "oracle/errors.hpp"
#include "oracle/impairments.hpp"
#include "oracle/parallel.hpp"
#include "oracle/planner.hpp"
#include "oracle/rng.hpp"
#include "oracle/similarity.hpp"

using namespace oracle;
namespace bb = oracle::baseband;

namespace {

constexpr uint64_t kSeed = 20240815;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void run_criterion(int id, const std::string& name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = fn();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s -- %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", id,
                name.c_str(), out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: spectral IMRR measurement vs closed form over the (a, t) grid
// ---------------------------------------------------------------------------

Outcome criterion_imrr_consistency() {
    const double theta_max = 20.0 * std::numbers::pi / 180.0;
    double worst = 0.0;
    for (int ia = 0; ia < 20; ++ia)
        for (int it = 0; it < 20; ++it) {
            const double alpha = -0.3 + 0.6 * ia / 19.0;
            const double theta = -theta_max + 2.0 * theta_max * it / 19.0;
            const impair::IqImbalance imb{alpha, theta};
            const double measured = impair::imrr_measured(imb, 16, 4096);
            const double analytic = impair::imrr_analytic(imb);
            if (measured <= impair::kPerfectRejectionDb &&
                analytic <= impair::kPerfectRejectionDb)
                continue;
            worst = std::max(worst, std::abs(measured - analytic));
        }
    return {worst < 0.1,
            fmt("max |measured - analytic| = %.4f dB on a 20x20 grid (limit 0.1)", worst)};
}

// ---------------------------------------------------------------------------
// criterion 2: assignment EMD vs permutation brute force + metric axioms
// ---------------------------------------------------------------------------

pattern::Pattern random_cloud(Rng& rng, int n) {
    pattern::Pattern p;
    p.points.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) p.points.push_back(rng.cgaussian(1.0));
    return p;
}

Outcome criterion_emd_oracle() {
    Rng rng(kSeed, 2);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const pattern::Pattern a = random_cloud(rng, 7);
        const pattern::Pattern b = random_cloud(rng, 7);
        worst = std::max(worst, std::abs(pattern::emd(a, b) - pattern::emd_bruteforce(a, b)));
    }
    if (worst > 1e-9) return {false, fmt("solver vs brute force differ by %.2e", worst)};

    for (int t = 0; t < 1000; ++t) {
        const pattern::Pattern a = random_cloud(rng, 16);
        const pattern::Pattern b = random_cloud(rng, 16);
        const pattern::Pattern c = random_cloud(rng, 16);
        const double ab = pattern::emd(a, b);
        const double ba = pattern::emd(b, a);
        const double ac = pattern::emd(a, c);
        const double cb = pattern::emd(c, b);
        if (ab < 0.0) return {false, "negative distance"};
        if (std::abs(ab - ba) > 1e-12) return {false, "asymmetric distance"};
        if (pattern::emd(a, a) != 0.0) return {false, "nonzero self-distance"};
        if (ab > ac + cb + 1e-9) return {false, "triangle inequality violated"};
    }
    return {true,
            fmt("1000 cloud pairs agree to %.1e; metric axioms hold on 1000 triples", worst)};
}

// ---------------------------------------------------------------------------
// shared planner artifacts for criteria 3 and 6
// ---------------------------------------------------------------------------

io::RunConfig acceptance_config() {
    io::RunConfig cfg;
    cfg.seed = kSeed;
    cfg.baseband.payload_symbols = 1024;
    cfg.devices.residual = {0.005, 0.005, 0.005};
    cfg.planner.snr_grid = {15, 20, 25, 30, 35, 40};
    cfg.planner.bits_per_point = 200000;
    cfg.planner.ber_bound = 1e-4;
    cfg.planner.emd_threshold = 0.15;
    cfg.planner.n_required = 16;
    cfg.planner.iq_levels = 32;
    cfg.planner.dc_levels = 32;
    cfg.planner.dc_max_magnitude = 0.6;
    return cfg;
}

struct PlannerArtifacts {
    plan::ImpairmentMap map;
    plan::FeasibleSet set;  // 16 members, T = 0.15, bound 1e-4 at 40 dB
    double build_seconds = 0.0;
};

const PlannerArtifacts& shared_planner() {
    static const PlannerArtifacts artifacts = [] {
        const auto t0 = std::chrono::steady_clock::now();
        const io::RunConfig cfg = acceptance_config();
        PlannerArtifacts a;
        a.map = plan::build_impairment_map(cli::level_banks(cfg), cli::map_params(cfg));
        a.set = plan::select_feasible(a.map, cli::select_params(cfg));
        a.build_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return a;
    }();
    return artifacts;
}

// ---------------------------------------------------------------------------
// criterion 3: channel/device invariance of impairment patterns
// ---------------------------------------------------------------------------

Outcome criterion_pattern_invariance() {
    const plan::FeasibleSet& set = shared_planner().set;
    io::RunConfig cfg = acceptance_config();
    cfg.gen.frames_per_device = 2;
    cfg.baseband.payload_symbols = 256;
    cfg.channel.snr_db = 30.0;
    cfg.channel.min_gain = 0.4;
    cfg.devices.count = 4;

    const int n_dev = 4, n_chan = 3, n_imp = 8;
    const auto residuals = cli::device_residuals(cfg);

    std::vector<pattern::Pattern> pats;
    std::vector<pattern::PatternLabel> labels;
    for (int d = 0; d < n_dev; ++d)
        for (int c = 0; c < n_chan; ++c)
            for (int i = 0; i < n_imp; ++i) {
                const bb::ChannelRealization ch = cli::make_channel(cfg, d, c);
                const bb::IqTrace trace = cli::generate_trace(
                    cfg, residuals[static_cast<size_t>(d)],
                    set.members[static_cast<size_t>(i)].config, d, ch,
                    mix64((static_cast<uint64_t>(d) << 16) ^
                          (static_cast<uint64_t>(c) << 8) ^ static_cast<uint64_t>(i)));
                const auto symbols = cli::demodulated_stream(cfg, trace);
                pats.push_back(pattern::extract_pattern(
                    symbols, 64,
                    mix64(kSeed + static_cast<uint64_t>(d * 100 + c * 10 + i))));
                labels.push_back({d, c, "m" + std::to_string(i)});
            }

    const pattern::EmdMatrix m = pattern::emd_matrix(pats, labels);
    std::vector<double> same, diff;
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = i + 1; j < m.size(); ++j)
            (labels[i].impairment == labels[j].impairment ? same : diff).push_back(m.at(i, j));

    const double mean_same = std::accumulate(same.begin(), same.end(), 0.0) /
                             static_cast<double>(same.size());
    const double mean_diff = std::accumulate(diff.begin(), diff.end(), 0.0) /
                             static_cast<double>(diff.size());
    const double q3_same = cli::quantile_linear(same, 0.75);
    const double q1_diff = cli::quantile_linear(diff, 0.25);
    const bool pass = mean_same < mean_diff && q3_same < q1_diff;
    return {pass, fmt("same-impairment mean EMD %.3f (q3 %.3f) vs different %.3f (q1 %.3f)",
                      mean_same, q3_same, mean_diff, q1_diff)};
}

// ---------------------------------------------------------------------------
// criteria 4, 5, 9: static-channel classification and its cross-channel drop
// ---------------------------------------------------------------------------

struct StaticResult {
    cnn::ConfusionMatrix cm_static, cm_cross;
    double acc_static = 0.0, acc_cross = 0.0;
    int epochs = 0;
};

StaticResult run_static_experiment(uint64_t seed) {
    io::RunConfig cfg = acceptance_config();
    cfg.seed = seed;
    cfg.devices.count = 8;
    cfg.channel.model = "rayleigh";
    cfg.channel.min_gain = 0.25;
    cfg.channel.snr_db = 25.0;
    cfg.channel.sessions = 2;
    cfg.gen.frames_per_device = 707;  // >= 6009 raw windows at stride 128

    const auto residuals = cli::device_residuals(cfg);
    const impair::ImpairmentConfig none;

    std::vector<cnn::IqWindow> train_set, val_set, test_set, cross_set;
    for (int d = 0; d < cfg.devices.count; ++d) {
        for (int session = 0; session < 2; ++session) {
            const bb::ChannelRealization ch = cli::make_channel(cfg, d, session);
            const bb::IqTrace trace =
                cli::generate_trace(cfg, residuals[static_cast<size_t>(d)], none, d, ch,
                                    mix64(static_cast<uint64_t>(d) << 24 ^
                                          static_cast<uint64_t>(session)));
            std::vector<cnn::IqWindow> windows = cnn::make_windows(trace, 128);
            Rng shuffle(seed, 0xc4c4ULL + static_cast<uint64_t>(d * 2 + session));
            for (size_t k = windows.size(); k > 1; --k)
                std::swap(windows[k - 1], windows[shuffle.below(k)]);
            if (session == 0) {
                // 5k training-side (4500 train + 500 val) and 1k test
                for (size_t k = 0; k < 4500; ++k) train_set.push_back(windows[k]);
                for (size_t k = 4500; k < 5000; ++k) val_set.push_back(windows[k]);
                for (size_t k = 5000; k < 6000; ++k) test_set.push_back(windows[k]);
            } else {
                for (size_t k = 0; k < 1000; ++k) cross_set.push_back(windows[k]);
            }
        }
    }

    cnn::Arch arch;
    arch.n_classes = cfg.devices.count;
    cnn::TrainRecipe recipe;
    recipe.batch_size = 128;
    recipe.max_epochs = 6;
    recipe.patience = 10;
    recipe.seed = seed;
    const cnn::TrainResult result = cnn::train(arch, cnn::Hyper{}, train_set, val_set, recipe);

    StaticResult out;
    out.cm_static = cnn::evaluate(result.model, test_set);
    out.cm_cross = cnn::evaluate(result.model, cross_set);
    out.acc_static = out.cm_static.accuracy();
    out.acc_cross = out.cm_cross.accuracy();
    out.epochs = static_cast<int>(result.log.size());
    return out;
}

// ---------------------------------------------------------------------------
// criteria 6, 9: impairment-aided train-once-deploy-anywhere
// ---------------------------------------------------------------------------

struct ImpairResult {
    std::vector<cnn::ConfusionMatrix> cms;  // one per unseen channel
    std::vector<double> accs;
    double control_mean_acc = 0.0;
    std::vector<cnn::ConfusionMatrix> control_cms;
};

ImpairResult run_impairment_experiment(const plan::FeasibleSet& set, uint64_t seed) {
    io::RunConfig cfg = acceptance_config();
    cfg.seed = seed;
    cfg.devices.count = 16;
    cfg.baseband.payload_symbols = 1024;

    const int n_classes = 16;
    const auto residuals = cli::device_residuals(cfg);
    const impair::ImpairmentConfig none;
    static const double kAugLevels[] = {-22.0, -18.0, -15.0, -13.5};

    // Cable (identity channel, 40 dB) captures per class; the impaired run
    // transmits the feasible members on a clean chain, the control run uses
    // 16 bit-similar residual-only devices.
    auto cable_windows = [&](bool impaired, int cls) {
        io::RunConfig c = cfg;
        c.channel.model = "identity";
        c.channel.snr_db = 40.0;
        c.gen.frames_per_device = 40;
        bb::ChannelRealization ch;
        ch.gain = {1.0, 0.0};
        ch.noise_power_db = -40.0;
        ch.seed = mix64(seed ^ 0xcab1eULL) + static_cast<uint64_t>(cls) +
                  (impaired ? 0u : 1000000u);
        const bb::IqTrace trace = cli::generate_trace(
            c, impaired ? none : residuals[static_cast<size_t>(cls)],
            impaired ? set.members[static_cast<size_t>(cls)].config : none, cls, ch,
            mix64(0xcab1eULL ^ static_cast<uint64_t>(cls) ^ (impaired ? 0u : 77u)));
        return cnn::make_symbol_windows(cli::demodulated_stream(c, trace), 128, cls);
    };

    auto test_windows = [&](bool impaired, int channel) {
        io::RunConfig c = cfg;
        c.channel.model = "rayleigh";
        c.channel.min_gain = 0.5;
        c.channel.snr_db = 30.0;
        c.gen.frames_per_device = 8;
        std::vector<cnn::IqWindow> out;
        for (int cls = 0; cls < n_classes; ++cls) {
            const bb::ChannelRealization ch =
                cli::make_channel(c, cls + (impaired ? 0 : 5000), 100 + channel);
            const bb::IqTrace trace = cli::generate_trace(
                c, residuals[static_cast<size_t>(cls)],
                impaired ? set.members[static_cast<size_t>(cls)].config : none, cls, ch,
                mix64(0x7e57ULL ^ static_cast<uint64_t>(cls * 10 + channel) ^
                      (impaired ? 0u : 77u)));
            const auto w =
                cnn::make_symbol_windows(cli::demodulated_stream(c, trace), 128, cls);
            out.insert(out.end(), w.begin(), w.end());
        }
        return out;
    };

    auto run_one = [&](bool impaired) {
        std::vector<cnn::IqWindow> train_set, val_set;
        for (int cls = 0; cls < n_classes; ++cls) {
            std::vector<cnn::IqWindow> w = cable_windows(impaired, cls);
            const size_t val_n = w.size() / 10;
            for (size_t k = 0; k < w.size(); ++k)
                (k < val_n ? val_set : train_set).push_back(w[k]);
        }
        const size_t base = train_set.size();
        for (size_t a = 0; a < 4; ++a) {
            const std::vector<cnn::IqWindow> copy(
                train_set.begin(), train_set.begin() + static_cast<std::ptrdiff_t>(base));
            const auto extra = cnn::augment(copy, kAugLevels[a], mix64(seed) + a);
            train_set.insert(train_set.end(), extra.begin(), extra.end());
        }

        cnn::Arch arch;
        arch.n_classes = n_classes;
        cnn::TrainRecipe recipe;
        recipe.batch_size = 128;
        recipe.max_epochs = 6;
        recipe.patience = 10;
        recipe.seed = seed;
        recipe.augment_bound_db = -13.5;
        return cnn::train(arch, cnn::Hyper{}, train_set, val_set, recipe);
    };

    ImpairResult out;
    const cnn::TrainResult aided = run_one(true);
    for (int c = 0; c < 3; ++c) {
        out.cms.push_back(cnn::evaluate(aided.model, test_windows(true, c)));
        out.accs.push_back(out.cms.back().accuracy());
    }

    const cnn::TrainResult control = run_one(false);
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        out.control_cms.push_back(cnn::evaluate(control.model, test_windows(false, c)));
        sum += out.control_cms.back().accuracy();
    }
    out.control_mean_acc = sum / 3.0;
    return out;
}

// ---------------------------------------------------------------------------
// criterion 7: greedy vs random allocation on a derived level bank
// ---------------------------------------------------------------------------

Outcome criterion_greedy_vs_random() {
    // Derived bank: 16 "safe" phase-imbalance levels every radio tolerates
    // at the lowest grid row, plus 4 "hot" levels that violate the BER
    // bound below high SNR. Greedy must never hand out what a radio cannot
    // afford; random draws uniformly from all 20 and pays for it.
    std::vector<impair::ImpairmentConfig> bank;
    for (int k = 0; k < 16; ++k) {
        impair::ImpairmentConfig c;
        c.iq.theta = 0.10 + 0.56 * k / 15.0;
        c.label = "safe" + std::to_string(k);
        bank.push_back(c);
    }
    for (const double theta : {1.00, 1.10, 1.20, 1.28}) {
        impair::ImpairmentConfig c;
        c.iq.theta = theta;
        c.label = "hot" + std::to_string(bank.size());
        bank.push_back(c);
    }

    plan::MapBuildParams mp;
    mp.snr_grid = {15, 20, 25, 30, 35, 40};
    mp.bits_per_point = 200000;
    mp.ber_bound = 1e-4;
    mp.payload_symbols = 512;
    mp.seed = kSeed;
    const plan::ImpairmentMap map = plan::build_impairment_map(bank, mp);

    plan::SelectParams sp;
    sp.n_required = 20;
    sp.emd_threshold = 0.01;  // admit the whole derived bank
    sp.ber_bound = 1e-4;
    sp.ref_snr_db = 40.0;
    sp.pattern.seed = kSeed;
    const plan::FeasibleSet set = plan::select_feasible(map, sp);
    if (set.size() < 20)
        return {false, fmt("only %zu of 20 bank members admitted", set.size())};

    static const double kSnrChoices[] = {20.0, 25.0, 30.0};
    constexpr int kAssignments = 200;
    constexpr int kRandomReps = 100;
    std::ostringstream detail;
    bool pass = true;
    for (const int R : {4, 8, 16}) {
        double greedy_sum = 0.0, random_sum = 0.0;
        for (int a = 0; a < kAssignments; ++a) {
            Rng rng(kSeed, mix64(0xc7ULL + static_cast<uint64_t>(a)) +
                               static_cast<uint64_t>(R));
            std::vector<plan::RadioProfile> radios(static_cast<size_t>(R));
            for (int i = 0; i < R; ++i) {
                radios[static_cast<size_t>(i)].id = i;
                radios[static_cast<size_t>(i)].snr_db = kSnrChoices[rng.below(3)];
            }
            const plan::Allocation g = plan::allocate_greedy(radios, set, map, 1e-4);
            if (!g.unclassifiable.empty())
                return {false, fmt("greedy left %zu radios unclassifiable (R=%d)",
                                   g.unclassifiable.size(), R)};
            // hard invariant: nothing above c_max
            for (const plan::Assignment& asg : g.assigned) {
                const auto& m = set.members[static_cast<size_t>(asg.member_index)];
                const auto cmax = plan::max_level(
                    map, m.type, radios[static_cast<size_t>(asg.radio_id)].snr_db, 1e-4);
                if (!cmax || m.level_index > *cmax)
                    return {false,
                            fmt("greedy exceeded c_max (R=%d, radio %d)", R, asg.radio_id)};
            }
            greedy_sum += plan::total_ber(g);
            double rnd = 0.0;
            for (int b = 0; b < kRandomReps; ++b)
                rnd += plan::total_ber(plan::allocate_random(
                    radios, set, map,
                    mix64(kSeed + 99) + static_cast<uint64_t>(a * 1000 + b)));
            random_sum += rnd / kRandomReps;
        }
        const double mg = greedy_sum / kAssignments;
        const double mr = random_sum / kAssignments;
        pass = pass && mg < mr;
        detail << "R=" << R << ": greedy " << fmt("%.2e", mg) << " vs random "
               << fmt("%.2e", mr) << "; ";
    }
    return {pass, detail.str() + "c_max invariant held on all 600 greedy runs"};
}

// ---------------------------------------------------------------------------
// criterion 8: gradient correctness on the reduced model
// ---------------------------------------------------------------------------

Outcome criterion_gradient_check() {
    cnn::Arch a;
    a.input_w = 8;
    a.kernel = 3;
    a.conv1_filters = 2;
    a.conv2_filters = 2;
    a.fc1 = 8;
    a.fc2 = 4;
    a.n_classes = 2;
    cnn::Hyper hp;
    hp.l2_lambda = 1e-3;

    cnn::RowMat<double> x(3, 2 * a.input_w);
    Rng rng(kSeed, 8);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = rng.gaussian();
    const std::vector<int> labels{0, 1, 1};
    const std::vector<uint64_t> keys{0, 1, 2};

    double worst = 0.0;
    for (const double dropout : {0.0, 0.5}) {
        hp.dropout = dropout;
        cnn::Params<double> w;
        cnn::detail::glorot_init(w, a, kSeed + 1);
        cnn::Params<double> grad;
        cnn::detail::objective_and_gradient(a, hp, w, x, labels, true, 5, keys, &grad);

        std::vector<std::vector<double>*> gs;
        grad.for_each([&](const std::string&, std::vector<double>& v) { gs.push_back(&v); });
        size_t slot = 0;
        w.for_each([&](const std::string&, std::vector<double>& wv) {
            std::vector<double>& gv = *gs[slot++];
            for (size_t i = 0; i < wv.size(); ++i) {
                const double eps = 1e-4;
                const double keep = wv[i];
                wv[i] = keep + eps;
                const double up =
                    cnn::detail::objective_and_gradient(a, hp, w, x, labels, true, 5, keys);
                wv[i] = keep - eps;
                const double dn =
                    cnn::detail::objective_and_gradient(a, hp, w, x, labels, true, 5, keys);
                wv[i] = keep;
                const double fd = (up - dn) / (2.0 * eps);
                worst = std::max(worst, std::abs(gv[i] - fd) /
                                            std::max(1.0, std::abs(gv[i]) + std::abs(fd)));
            }
        });
    }
    return {worst < 1e-4,
            fmt("max relative gradient error %.2e over every tensor, dropout off/on (limit 1e-4)",
                worst)};
}

}  // namespace

int main() {
    std::printf("acceptance suite (seed %llu, %d worker threads)\n",
                static_cast<unsigned long long>(kSeed), worker_count());
    std::fflush(stdout);

    run_criterion(1, "IMRR spectral measurement matches the closed form",
                  criterion_imrr_consistency);
    run_criterion(2, "EMD solver equals brute force; metric axioms hold",
                  criterion_emd_oracle);
    run_criterion(3, "impairment patterns are channel- and device-invariant",
                  criterion_pattern_invariance);

    StaticResult static_run;
    run_criterion(4, "static-channel raw-IQ classification >= 90%", [&] {
        static_run = run_static_experiment(kSeed);
        return Outcome{static_run.acc_static >= 0.90,
                       fmt("8 devices, 5k/1k windows: accuracy %.4f after %d epochs",
                           static_run.acc_static, static_run.epochs)};
    });
    run_criterion(5, "fresh channels cost >= 25 accuracy points", [&] {
        const double drop = static_run.acc_static - static_run.acc_cross;
        return Outcome{drop >= 0.25, fmt("accuracy %.4f -> %.4f (drop %.1f points)",
                                         static_run.acc_static, static_run.acc_cross,
                                         100.0 * drop)};
    });

    ImpairResult impair_run;
    run_criterion(6, "impairment-aided training deploys anywhere", [&] {
        impair_run = run_impairment_experiment(shared_planner().set, kSeed);
        const double worst = *std::min_element(impair_run.accs.begin(), impair_run.accs.end());
        const bool pass = worst >= 0.97 && impair_run.control_mean_acc <= 0.60;
        return Outcome{pass,
                       fmt("unseen-channel accuracy %.4f/%.4f/%.4f (floor 0.97); "
                           "no-impairment control %.4f (ceiling 0.60)",
                           impair_run.accs[0], impair_run.accs[1], impair_run.accs[2],
                           impair_run.control_mean_acc)};
    });

    run_criterion(7, "greedy allocation beats random at every pool size",
                  criterion_greedy_vs_random);
    run_criterion(8, "analytic gradients match central differences",
                  criterion_gradient_check);

    run_criterion(9, "equal seeds reproduce identical confusion matrices", [&] {
        const StaticResult s2 = run_static_experiment(kSeed);
        const ImpairResult i2 = run_impairment_experiment(shared_planner().set, kSeed);
        const bool static_ok =
            s2.cm_static == static_run.cm_static && s2.cm_cross == static_run.cm_cross;
        bool impair_ok = i2.cms.size() == impair_run.cms.size();
        for (size_t k = 0; impair_ok && k < i2.cms.size(); ++k)
            impair_ok = i2.cms[k] == impair_run.cms[k] &&
                        i2.control_cms[k] == impair_run.control_cms[k];
        return Outcome{static_ok && impair_ok,
                       fmt("static rerun %s, impairment rerun %s",
                           static_ok ? "identical" : "DIFFERS",
                           impair_ok ? "identical" : "DIFFERS")};
    });

    if (g_failures == 0)
        std::printf("all 9 criteria passed\n");
    else
        std::printf("%d criteria FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
