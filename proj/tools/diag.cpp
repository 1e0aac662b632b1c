// Temporary diagnostic for the impairment-aided experiment.
#include <cstdio>
#include <vector>

#include "experiments.hpp"
#include "oracle/cnn.hpp"
#include "oracle/planner.hpp"
#include "oracle/rng.hpp"
#include "oracle/similarity.hpp"

using namespace oracle;
namespace bb = oracle::baseband;

static constexpr uint64_t kSeed = 20240815;

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
    cfg.planner.dc_levels = 16;
    cfg.planner.dc_max_magnitude = 0.6;
    return cfg;
}

int main() {
    io::RunConfig cfg = acceptance_config();
    cfg.devices.count = 16;

    const auto map = plan::build_impairment_map(cli::level_banks(cfg), cli::map_params(cfg));
    const auto set = plan::select_feasible(map, cli::select_params(cfg));
    std::printf("feasible members (%zu):\n", set.size());
    for (size_t m = 0; m < set.size(); ++m)
        std::printf("  %2zu: %-6s type=%s level=%d alpha=%+.3f theta=%+.3f dc=(%+.3f,%+.3f) ref_ber=%.2e\n",
                    m, set.members[m].config.label.c_str(), plan::type_name(set.members[m].type),
                    set.members[m].level_index, set.members[m].config.iq.alpha,
                    set.members[m].config.iq.theta, set.members[m].config.dc.offset.real(),
                    set.members[m].config.dc.offset.imag(), set.members[m].ref_ber);

    const int n_classes = 16;
    const auto residuals = cli::device_residuals(cfg);
    const impair::ImpairmentConfig none;
    static const double kAugLevels[] = {-26.0, -22.0, -18.0};

    auto cable_windows = [&](int cls) {
        io::RunConfig c = cfg;
        c.channel.model = "identity";
        c.channel.snr_db = 40.0;
        c.gen.frames_per_device = 60;
        bb::ChannelRealization ch;
        ch.gain = {1.0, 0.0};
        ch.noise_power_db = -40.0;
        ch.seed = mix64(kSeed ^ 0xcab1eULL) + static_cast<uint64_t>(cls);
        const bb::IqTrace trace = cli::generate_trace(
            c, none, set.members[static_cast<size_t>(cls)].config, cls, ch,
            mix64(0xcab1eULL ^ static_cast<uint64_t>(cls)));
        return cnn::make_symbol_windows(cli::demodulated_stream(c, trace), 128, cls);
    };

    auto test_windows = [&](int channel) {
        io::RunConfig c = cfg;
        c.channel.model = "rayleigh";
        c.channel.min_gain = 0.5;
        c.channel.snr_db = 35.0;
        c.gen.frames_per_device = 8;
        std::vector<cnn::IqWindow> out;
        for (int cls = 0; cls < n_classes; ++cls) {
            const bb::ChannelRealization ch = cli::make_channel(c, cls, 100 + channel);
            const bb::IqTrace trace = cli::generate_trace(
                c, residuals[static_cast<size_t>(cls)],
                set.members[static_cast<size_t>(cls)].config, cls, ch,
                mix64(0x7e57ULL ^ static_cast<uint64_t>(cls * 10 + channel)));
            const auto w = cnn::make_symbol_windows(cli::demodulated_stream(c, trace), 128, cls);
            out.insert(out.end(), w.begin(), w.end());
        }
        return out;
    };

    // EMD between the train-side reference pattern and a test-side pattern
    // of the same class, plus nearest other-class distance.
    std::printf("\ntrain-vs-test pattern distances per class:\n");
    for (int cls = 0; cls < n_classes; ++cls) {
        io::RunConfig c = cfg;
        c.channel.model = "rayleigh";
        c.channel.min_gain = 0.5;
        c.channel.snr_db = 30.0;
        c.gen.frames_per_device = 2;
        c.baseband.payload_symbols = 256;
        const bb::ChannelRealization ch = cli::make_channel(c, cls, 100);
        const bb::IqTrace trace = cli::generate_trace(
            c, residuals[static_cast<size_t>(cls)], set.members[static_cast<size_t>(cls)].config,
            cls, ch, mix64(0xd1a6ULL + static_cast<uint64_t>(cls)));
        const auto sym = cli::demodulated_stream(c, trace);
        const pattern::Pattern test_pat = pattern::extract_pattern(sym, 64, 3);
        const double d_same = pattern::emd(test_pat, set.members[static_cast<size_t>(cls)].pat);
        double d_other = 1e9;
        int other = -1;
        for (int m = 0; m < n_classes; ++m) {
            if (m == cls) continue;
            const double d = pattern::emd(test_pat, set.members[static_cast<size_t>(m)].pat);
            if (d < d_other) { d_other = d; other = m; }
        }
        std::printf("  class %2d: same %.3f, nearest-other %.3f (class %d) %s\n", cls, d_same,
                    d_other, other, d_same < d_other ? "" : "  <-- COLLISION");
    }

    std::vector<cnn::IqWindow> train_set, val_set;
    for (int cls = 0; cls < n_classes; ++cls) {
        std::vector<cnn::IqWindow> w = cable_windows(cls);
        const size_t val_n = w.size() / 10;
        for (size_t k = 0; k < w.size(); ++k)
            (k < val_n ? val_set : train_set).push_back(w[k]);
    }
    const size_t base = train_set.size();
    for (size_t a = 0; a < 3; ++a) {
        const std::vector<cnn::IqWindow> copy(train_set.begin(),
                                              train_set.begin() + static_cast<std::ptrdiff_t>(base));
        const auto extra = cnn::augment(copy, kAugLevels[a], mix64(kSeed) + a);
        train_set.insert(train_set.end(), extra.begin(), extra.end());
    }
    {   // validation mirrors the noisy deployment distribution
        const auto noisy_val = cnn::augment(val_set, -22.0, mix64(kSeed) + 71);
        val_set.insert(val_set.end(), noisy_val.begin(), noisy_val.end());
    }
    std::printf("\ntrain %zu windows, val %zu\n", train_set.size(), val_set.size());

    cnn::Arch arch;
    arch.n_classes = n_classes;
    cnn::TrainRecipe recipe;
    recipe.batch_size = 64;
    recipe.max_epochs = 14;
    recipe.patience = 10;
    recipe.seed = kSeed;
    recipe.augment_bound_db = -13.5;
    const cnn::TrainResult r = cnn::train(arch, cnn::Hyper{}, train_set, val_set, recipe);
    for (const auto& e : r.log)
        std::printf("  epoch %2d: loss %.4f val %.4f\n", e.epoch, e.train_loss, e.val_accuracy);

    for (int c = 0; c < 1; ++c) {
        const auto tw = test_windows(c);
        const cnn::ConfusionMatrix cm = cnn::evaluate(r.model, tw);
        std::printf("channel %d accuracy %.4f\n", c, cm.accuracy());
        std::printf("per-class accuracy: ");
        for (int t = 0; t < n_classes; ++t) {
            long long row = 0;
            for (int p = 0; p < n_classes; ++p) row += cm.at(t, p);
            std::printf("%d:%.2f ", t, row ? static_cast<double>(cm.at(t, t)) / row : 0.0);
        }
        std::printf("\n");
        // dominant confusions
        for (int t = 0; t < n_classes; ++t)
            for (int p = 0; p < n_classes; ++p)
                if (t != p && cm.at(t, p) > 5)
                    std::printf("  confusion: true %d -> pred %d (%lld)\n", t, p, cm.at(t, p));
    }
    return 0;
}
