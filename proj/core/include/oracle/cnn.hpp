#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oracle/baseband.hpp"
#include "oracle/cnn_kernels.hpp"

namespace oracle::cnn {

constexpr int kWindowLen = 128;

// One classifier example: 2 x width window, I stream then Q stream.
struct IqWindow {
    std::vector<float> values;  // size 2 * width
    int label = 0;

    int width() const { return static_cast<int>(values.size() / 2); }
    float* i_row() { return values.data(); }
    float* q_row() { return values.data() + width(); }
};

// Sliding windows at offsets 0, stride, 2*stride, ... over the trace;
// count = floor((L - 128) / stride) + 1. Throws on traces shorter than
// one window.
std::vector<IqWindow> make_windows(const baseband::IqTrace& trace, int stride);

// Same slicing over an already-equalized symbol stream (dynamic-channel
// input mode: row 0 = symbol I, row 1 = symbol Q).
std::vector<IqWindow> make_symbol_windows(const std::vector<baseband::cplx>& symbols,
                                          int stride, int label);

struct CnnModel {
    Arch arch;
    Hyper hyper;
    Params<float> params;
};

CnnModel init_model(const Arch& arch, const Hyper& hyper, uint64_t seed);

// Batch forward pass; rows are probability vectors. Dropout is active only
// in train mode and derives per-row streams from (seed, row index).
RowMat<float> forward(const CnnModel& model, const std::vector<IqWindow>& batch,
                      bool train_mode, uint64_t seed = 0);

struct ConfusionMatrix {
    int n_classes = 0;
    std::vector<long long> counts;  // row = truth, col = prediction

    long long& at(int truth, int pred) { return counts[static_cast<size_t>(truth) * n_classes + pred]; }
    long long at(int truth, int pred) const { return counts[static_cast<size_t>(truth) * n_classes + pred]; }
    long long total() const;
    long long trace() const;
    double accuracy() const;
    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix evaluate(const CnnModel& model, const std::vector<IqWindow>& test);

void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm);

struct TrainRecipe {
    int batch_size = 128;
    int max_epochs = 50;
    int patience = 10;  // epochs without val-accuracy improvement
    uint64_t seed = 1;
    // Bound for any augmentation noise applied to this run's data.
    double augment_bound_db = -13.0;
};

struct EpochStats {
    int epoch = 0;         // 1-based
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    CnnModel model;  // weights of the best-validation epoch
    std::vector<EpochStats> log;
    int best_epoch = 0;
    double best_val_accuracy = 0.0;
};

// Adam + dropout + L2 training with early stopping on validation accuracy.
// Fully reproducible from recipe.seed: shuffles, init and dropout all derive
// from it, and gradient reduction order is fixed, so equal seeds give
// bit-identical weights on one platform. Throws TrainingDiverged when the
// loss goes non-finite.
TrainResult train(const Arch& arch, const Hyper& hyper,
                  const std::vector<IqWindow>& train_set,
                  const std::vector<IqWindow>& val_set, const TrainRecipe& recipe);

// Adds circular complex Gaussian noise of the stated power to each window
// (per-window independent streams). noise_power_db must stay at or below
// -13 dB; -inf is the identity.
std::vector<IqWindow> augment(const std::vector<IqWindow>& windows,
                              double noise_power_db, uint64_t seed);

}  // namespace oracle::cnn
