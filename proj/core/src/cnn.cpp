#include "oracle/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "oracle/errors.hpp"
#include "oracle/parallel.hpp"

namespace oracle::cnn {

namespace {

constexpr int kChunk = 16;  // fixed so gradient reduction order never moves

void check_batch(const Arch& arch, const std::vector<IqWindow>& batch) {
    for (const IqWindow& w : batch) {
        if (w.width() != arch.input_w ||
            w.values.size() != static_cast<size_t>(2 * arch.input_w))
            throw InvalidInput("cnn: window shape does not match the architecture");
        if (w.label < 0 || w.label >= arch.n_classes)
            throw InvalidInput("cnn: label out of range");
    }
}

RowMat<float> gather(const std::vector<IqWindow>& set, const std::vector<size_t>& idx,
                     size_t begin, size_t end) {
    RowMat<float> x(static_cast<Eigen::Index>(end - begin),
                    static_cast<Eigen::Index>(set[idx[begin]].values.size()));
    for (size_t r = begin; r < end; ++r)
        for (size_t c = 0; c < set[idx[r]].values.size(); ++c)
            x(static_cast<Eigen::Index>(r - begin), static_cast<Eigen::Index>(c)) =
                set[idx[r]].values[c];
    return x;
}

int argmax_row(const RowMat<float>& p, Eigen::Index r) {
    int best = 0;
    for (Eigen::Index c = 1; c < p.cols(); ++c)
        if (p(r, c) > p(r, best)) best = static_cast<int>(c);
    return best;
}

}  // namespace

std::vector<IqWindow> make_windows(const baseband::IqTrace& trace, int stride) {
    if (stride < 1) throw InvalidInput("make_windows: stride < 1");
    const size_t len = trace.samples.size();
    if (len < static_cast<size_t>(kWindowLen))
        throw InvalidInput("make_windows: trace shorter than one window");
    const size_t count = (len - kWindowLen) / static_cast<size_t>(stride) + 1;
    std::vector<IqWindow> out(count);
    for (size_t w = 0; w < count; ++w) {
        const size_t off = w * static_cast<size_t>(stride);
        IqWindow& win = out[w];
        win.values.resize(2 * kWindowLen);
        win.label = trace.device_label;
        for (int k = 0; k < kWindowLen; ++k) {
            const baseband::cplx s = trace.samples[off + static_cast<size_t>(k)];
            win.values[static_cast<size_t>(k)] = static_cast<float>(s.real());
            win.values[static_cast<size_t>(kWindowLen + k)] = static_cast<float>(s.imag());
        }
    }
    return out;
}

std::vector<IqWindow> make_symbol_windows(const std::vector<baseband::cplx>& symbols,
                                          int stride, int label) {
    baseband::IqTrace t;
    t.samples = symbols;
    t.device_label = label;
    return make_windows(t, stride);
}

CnnModel init_model(const Arch& arch, const Hyper& hyper, uint64_t seed) {
    if (!arch.valid()) throw InvalidInput("init_model: inconsistent architecture");
    CnnModel m;
    m.arch = arch;
    m.hyper = hyper;
    detail::glorot_init(m.params, arch, seed);
    return m;
}

RowMat<float> forward(const CnnModel& model, const std::vector<IqWindow>& batch,
                      bool train_mode, uint64_t seed) {
    if (batch.empty()) throw InvalidInput("forward: empty batch");
    for (const IqWindow& w : batch)
        if (w.width() != model.arch.input_w)
            throw InvalidInput("forward: window shape does not match the architecture");

    const size_t n = batch.size();
    RowMat<float> probs(static_cast<Eigen::Index>(n), model.arch.n_classes);
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});

    const size_t chunk = 64;
    const size_t nchunks = (n + chunk - 1) / chunk;
    parallel_for(nchunks, [&](size_t c) {
        const size_t begin = c * chunk;
        const size_t end = std::min(n, begin + chunk);
        detail::Workspace<float> ws;
        std::vector<uint64_t> keys(end - begin);
        for (size_t r = begin; r < end; ++r) keys[r - begin] = r;
        const RowMat<float> x = gather(batch, idx, begin, end);
        detail::forward_chunk(model.arch, model.hyper, model.params, x, train_mode, seed,
                              keys, ws);
        probs.middleRows(static_cast<Eigen::Index>(begin),
                         static_cast<Eigen::Index>(end - begin)) = ws.P;
    });
    return probs;
}

long long ConfusionMatrix::total() const {
    long long t = 0;
    for (const long long c : counts) t += c;
    return t;
}

long long ConfusionMatrix::trace() const {
    long long t = 0;
    for (int k = 0; k < n_classes; ++k) t += at(k, k);
    return t;
}

double ConfusionMatrix::accuracy() const {
    const long long tot = total();
    return tot == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(tot);
}

ConfusionMatrix evaluate(const CnnModel& model, const std::vector<IqWindow>& test) {
    if (test.empty()) throw InvalidInput("evaluate: empty test set");
    check_batch(model.arch, test);
    const RowMat<float> p = forward(model, test, /*train_mode=*/false);
    ConfusionMatrix cm;
    cm.n_classes = model.arch.n_classes;
    cm.counts.assign(static_cast<size_t>(cm.n_classes) * cm.n_classes, 0);
    for (size_t r = 0; r < test.size(); ++r)
        cm.at(test[r].label, argmax_row(p, static_cast<Eigen::Index>(r))) += 1;
    return cm;
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm) {
    std::ofstream out(path);
    if (!out) throw FileError("write_confusion_csv: cannot open " + path);
    out << "truth\\pred";
    for (int c = 0; c < cm.n_classes; ++c) out << ",c" << c;
    out << '\n';
    for (int t = 0; t < cm.n_classes; ++t) {
        out << 'c' << t;
        for (int c = 0; c < cm.n_classes; ++c) out << ',' << cm.at(t, c);
        out << '\n';
    }
}

TrainResult train(const Arch& arch, const Hyper& hyper,
                  const std::vector<IqWindow>& train_set,
                  const std::vector<IqWindow>& val_set, const TrainRecipe& recipe) {
    if (!arch.valid()) throw InvalidInput("train: inconsistent architecture");
    if (arch.n_classes < 2) throw InvalidInput("train: need at least 2 classes");
    if (train_set.empty()) throw InvalidInput("train: empty training set");
    if (val_set.empty()) throw InvalidInput("train: empty validation set");
    if (recipe.patience < 1) throw InvalidInput("train: patience < 1");
    if (recipe.batch_size < 1) throw InvalidInput("train: batch_size < 1");
    if (recipe.augment_bound_db > -13.0)
        throw InvalidInput("train: augmentation bound above -13 dB");
    check_batch(arch, train_set);
    check_batch(arch, val_set);

    CnnModel model = init_model(arch, hyper, recipe.seed);
    detail::AdamState<float> adam;
    adam.init(arch);

    TrainResult result;
    result.model = model;
    result.best_val_accuracy = -1.0;

    const size_t n = train_set.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});

    int since_improve = 0;
    for (int epoch = 1; epoch <= recipe.max_epochs; ++epoch) {
        // Seeded Fisher-Yates, fresh permutation per epoch.
        Rng shuffle_rng(recipe.seed, 0x73687566ULL + static_cast<uint64_t>(epoch));
        for (size_t k = n; k > 1; --k) {
            const size_t j = static_cast<size_t>(shuffle_rng.below(k));
            std::swap(order[k - 1], order[j]);
        }

        double epoch_loss_sum = 0.0;
        for (size_t start = 0; start < n; start += static_cast<size_t>(recipe.batch_size)) {
            const size_t stop = std::min(n, start + static_cast<size_t>(recipe.batch_size));
            const int batch_total = static_cast<int>(stop - start);
            const size_t nchunks =
                (static_cast<size_t>(batch_total) + kChunk - 1) / kChunk;

            std::vector<Params<float>> grads(nchunks);
            std::vector<double> losses(nchunks, 0.0);
            parallel_for(nchunks, [&](size_t c) {
                const size_t cb = start + c * kChunk;
                const size_t ce = std::min(stop, cb + kChunk);
                const RowMat<float> x = gather(train_set, order, cb, ce);
                std::vector<int> labels(ce - cb);
                std::vector<uint64_t> keys(ce - cb);
                for (size_t r = cb; r < ce; ++r) {
                    labels[r - cb] = train_set[order[r]].label;
                    keys[r - cb] = (static_cast<uint64_t>(epoch) << 40) ^ order[r];
                }
                detail::Workspace<float> ws;
                detail::forward_chunk(arch, hyper, model.params, x, /*train=*/true,
                                      recipe.seed, keys, ws);
                losses[c] = detail::backward_chunk(arch, model.params, labels, batch_total,
                                                   ws, grads[c]);
            });

            // Fixed reduction order keeps training bitwise reproducible.
            for (size_t c = 1; c < nchunks; ++c) detail::add_params(grads[0], grads[c]);
            double batch_loss = 0.0;
            for (const double l : losses) batch_loss += l;
            batch_loss = batch_loss / batch_total +
                         detail::l2_penalty(model.params, hyper.l2_lambda);
            if (!std::isfinite(batch_loss))
                throw TrainingDiverged(epoch, "train: non-finite loss at epoch " +
                                                  std::to_string(epoch));
            epoch_loss_sum += batch_loss * batch_total;

            detail::adam_step(model.params, grads[0], adam, hyper);
        }

        const double val_acc = evaluate(model, val_set).accuracy();
        result.log.push_back({epoch, epoch_loss_sum / static_cast<double>(n), val_acc});

        if (val_acc > result.best_val_accuracy) {
            result.best_val_accuracy = val_acc;
            result.best_epoch = epoch;
            result.model = model;
            since_improve = 0;
        } else if (++since_improve >= recipe.patience) {
            break;
        }
    }
    return result;
}

std::vector<IqWindow> augment(const std::vector<IqWindow>& windows,
                              double noise_power_db, uint64_t seed) {
    if (noise_power_db > -13.0)
        throw InvalidInput("augment: noise power above the -13 dB bound");
    std::vector<IqWindow> out = windows;
    if (std::isinf(noise_power_db) && noise_power_db < 0.0) return out;
    const double power = std::pow(10.0, noise_power_db / 10.0);
    for (size_t w = 0; w < out.size(); ++w) {
        Rng rng(seed, 0x61756700ULL + w);
        IqWindow& win = out[w];
        const int width = win.width();
        for (int k = 0; k < width; ++k) {
            const std::complex<double> nz = rng.cgaussian(power);
            win.values[static_cast<size_t>(k)] += static_cast<float>(nz.real());
            win.values[static_cast<size_t>(width + k)] += static_cast<float>(nz.imag());
        }
    }
    return out;
}

}  // namespace oracle::cnn
