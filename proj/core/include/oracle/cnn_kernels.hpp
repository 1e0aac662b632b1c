#pragma once

// Templated forward/backward/optimizer internals for the IQ-window CNN.
// The production path instantiates float; tests instantiate double for
// finite-difference gradient checks against the same code.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "oracle/errors.hpp"
#include "oracle/rng.hpp"

namespace oracle::cnn {

// Layer geometry. The input is a 2 x input_w window (I row, Q row); both
// convolutions are stride-1 "valid", no pooling:
//   2 x W -> conv1 (1 x k, F1) -> 2 x (W-k+1) x F1
//         -> conv2 (2 x k over F1 channels, F2) -> 1 x (W-2k+2) x F2
//         -> flatten -> fc1 -> fc2 -> softmax head.
struct Arch {
    int input_w = 128;
    int kernel = 7;
    int conv1_filters = 50;
    int conv2_filters = 50;
    int fc1 = 256;
    int fc2 = 80;
    int n_classes = 2;

    int conv1_len() const { return input_w - kernel + 1; }
    int conv2_len() const { return conv1_len() - kernel + 1; }
    int conv2_in() const { return 2 * kernel * conv1_filters; }
    int flat() const { return conv2_len() * conv2_filters; }
    bool valid() const {
        return input_w > 0 && kernel > 0 && conv2_len() >= 1 && conv1_filters > 0 &&
               conv2_filters > 0 && fc1 > 0 && fc2 > 0 && n_classes >= 2;
    }
    bool operator==(const Arch&) const = default;
};

struct Hyper {
    double learning_rate = 1e-4;
    double l2_lambda = 1e-4;
    double dropout = 0.5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Model parameters as flat tensors. Weight matrices are [out][in] row-major:
//   conv1_w: F1 x k                 conv2_w: F2 x (2*k*F1), col (r*k+dt)*F1+c
//   fc1_w:   fc1 x flat (col t*F2+f)  fc2_w: fc2 x fc1   head_w: C x fc2
template <class T>
struct Params {
    std::vector<T> conv1_w, conv1_b, conv2_w, conv2_b;
    std::vector<T> fc1_w, fc1_b, fc2_w, fc2_b, head_w, head_b;

    void resize(const Arch& a) {
        conv1_w.assign(static_cast<size_t>(a.conv1_filters) * a.kernel, T{0});
        conv1_b.assign(static_cast<size_t>(a.conv1_filters), T{0});
        conv2_w.assign(static_cast<size_t>(a.conv2_filters) * a.conv2_in(), T{0});
        conv2_b.assign(static_cast<size_t>(a.conv2_filters), T{0});
        fc1_w.assign(static_cast<size_t>(a.fc1) * a.flat(), T{0});
        fc1_b.assign(static_cast<size_t>(a.fc1), T{0});
        fc2_w.assign(static_cast<size_t>(a.fc2) * a.fc1, T{0});
        fc2_b.assign(static_cast<size_t>(a.fc2), T{0});
        head_w.assign(static_cast<size_t>(a.n_classes) * a.fc2, T{0});
        head_b.assign(static_cast<size_t>(a.n_classes), T{0});
    }

    template <class F>
    void for_each(F&& f) {
        f("conv1_w", conv1_w); f("conv1_b", conv1_b);
        f("conv2_w", conv2_w); f("conv2_b", conv2_b);
        f("fc1_w", fc1_w);     f("fc1_b", fc1_b);
        f("fc2_w", fc2_w);     f("fc2_b", fc2_b);
        f("head_w", head_w);   f("head_b", head_b);
    }
    template <class F>
    void for_each(F&& f) const {
        f("conv1_w", conv1_w); f("conv1_b", conv1_b);
        f("conv2_w", conv2_w); f("conv2_b", conv2_b);
        f("fc1_w", fc1_w);     f("fc1_b", fc1_b);
        f("fc2_w", fc2_w);     f("fc2_b", fc2_b);
        f("head_w", head_w);   f("head_b", head_b);
    }
};

inline std::vector<std::pair<std::string, std::vector<int>>> tensor_shapes(const Arch& a) {
    return {
        {"conv1_w", {a.conv1_filters, a.kernel}},
        {"conv1_b", {a.conv1_filters}},
        {"conv2_w", {a.conv2_filters, a.conv2_in()}},
        {"conv2_b", {a.conv2_filters}},
        {"fc1_w", {a.fc1, a.flat()}},
        {"fc1_b", {a.fc1}},
        {"fc2_w", {a.fc2, a.fc1}},
        {"fc2_b", {a.fc2}},
        {"head_w", {a.n_classes, a.fc2}},
        {"head_b", {a.n_classes}},
    };
}

namespace detail {

constexpr uint64_t kDropoutSalt = 0x64726f70ULL;

// Inverted-dropout mask row: 0 with probability p, else 1/(1-p).
template <class T>
void fill_mask(T* row, int n, double p, uint64_t seed, uint64_t sample_key, int layer) {
    if (p <= 0.0) {
        for (int i = 0; i < n; ++i) row[i] = T{1};
        return;
    }
    Rng rng(seed ^ kDropoutSalt, mix64(sample_key) + static_cast<uint64_t>(layer));
    const T keep = static_cast<T>(1.0 / (1.0 - p));
    for (int i = 0; i < n; ++i) row[i] = rng.uniform() < p ? T{0} : keep;
}

template <class T>
struct Workspace {
    RowMat<T> A1, Z1;      // im2col + conv1 pre-activation
    RowMat<T> Act1;        // relu(Z1)
    RowMat<T> A2, Z2, Act2;
    RowMat<T> Z3, Act3, Z4, Act4, Z5, P;
    RowMat<T> mask3, mask4;
    // backward scratch
    RowMat<T> dZ5, dAct4, dZ4, dAct3, dZ3, dZ2, dA2, dAct1, dZ1;
};

template <class T>
void softmax_rows(RowMat<T>& z, RowMat<T>& p) {
    p.resizeLike(z);
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const T zmax = z.row(r).maxCoeff();
        p.row(r) = (z.row(r).array() - zmax).exp();
        const T sum = p.row(r).sum();
        p.row(r) /= sum;
    }
}

// Forward over a chunk of B windows (rows of x are 2W floats, I row then
// Q row). sample_keys drive the per-sample dropout streams in train mode.
template <class T>
void forward_chunk(const Arch& a, const Hyper& hp, const Params<T>& w,
                   const RowMat<T>& x, bool train_mode, uint64_t seed,
                   const std::vector<uint64_t>& sample_keys, Workspace<T>& ws) {
    const int B = static_cast<int>(x.rows());
    const int W = a.input_w, k = a.kernel;
    const int L1 = a.conv1_len(), L2 = a.conv2_len();
    const int F1 = a.conv1_filters, F2 = a.conv2_filters;

    using CMap = Eigen::Map<const RowMat<T>>;
    const CMap W1(w.conv1_w.data(), F1, k);
    const CMap W2(w.conv2_w.data(), F2, a.conv2_in());
    const CMap W3(w.fc1_w.data(), a.fc1, a.flat());
    const CMap W4(w.fc2_w.data(), a.fc2, a.fc1);
    const CMap W5(w.head_w.data(), a.n_classes, a.fc2);
    const Eigen::Map<const Eigen::Vector<T, Eigen::Dynamic>> b1(w.conv1_b.data(), F1),
        b2(w.conv2_b.data(), F2), b3(w.fc1_b.data(), a.fc1), b4(w.fc2_b.data(), a.fc2),
        b5(w.head_b.data(), a.n_classes);

    // conv1 as GEMM: rows (b, r, t), cols dt.
    ws.A1.resize(static_cast<Eigen::Index>(B) * 2 * L1, k);
    for (int b = 0; b < B; ++b)
        for (int r = 0; r < 2; ++r)
            for (int t = 0; t < L1; ++t)
                ws.A1.row((static_cast<Eigen::Index>(b) * 2 + r) * L1 + t) =
                    x.row(b).segment(r * W + t, k);
    ws.Z1.noalias() = ws.A1 * W1.transpose();
    ws.Z1.rowwise() += b1.transpose();
    ws.Act1 = ws.Z1.cwiseMax(T{0});

    // conv2 im2col: rows (b, t), cols (r, dt, c).
    ws.A2.resize(static_cast<Eigen::Index>(B) * L2, a.conv2_in());
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < L2; ++t) {
            const Eigen::Index row = static_cast<Eigen::Index>(b) * L2 + t;
            for (int r = 0; r < 2; ++r)
                for (int dt = 0; dt < k; ++dt)
                    ws.A2.row(row).segment((r * k + dt) * F1, F1) =
                        ws.Act1.row((static_cast<Eigen::Index>(b) * 2 + r) * L1 + t + dt);
        }
    ws.Z2.noalias() = ws.A2 * W2.transpose();
    ws.Z2.rowwise() += b2.transpose();
    ws.Act2 = ws.Z2.cwiseMax(T{0});

    // Act2's (b, t, c) layout is already the flattened (b, t*F2+c) view.
    const Eigen::Map<const RowMat<T>> flat(ws.Act2.data(), B, a.flat());

    ws.Z3.noalias() = flat * W3.transpose();
    ws.Z3.rowwise() += b3.transpose();
    ws.Act3 = ws.Z3.cwiseMax(T{0});
    ws.mask3.resize(B, a.fc1);
    ws.mask4.resize(B, a.fc2);
    if (train_mode) {
        for (int b = 0; b < B; ++b) {
            fill_mask(ws.mask3.row(b).data(), a.fc1, hp.dropout, seed, sample_keys[static_cast<size_t>(b)], 0);
            fill_mask(ws.mask4.row(b).data(), a.fc2, hp.dropout, seed, sample_keys[static_cast<size_t>(b)], 1);
        }
        ws.Act3.array() *= ws.mask3.array();
    } else {
        ws.mask3.setOnes();
        ws.mask4.setOnes();
    }

    ws.Z4.noalias() = ws.Act3 * W4.transpose();
    ws.Z4.rowwise() += b4.transpose();
    ws.Act4 = ws.Z4.cwiseMax(T{0});
    if (train_mode) ws.Act4.array() *= ws.mask4.array();

    ws.Z5.noalias() = ws.Act4 * W5.transpose();
    ws.Z5.rowwise() += b5.transpose();
    softmax_rows(ws.Z5, ws.P);
}

// Backward for the chunk; fills grad (overwrites) and returns the summed
// cross-entropy of the chunk. dZ5 folds the 1/batch_total factor so chunk
// gradients add up to the batch-mean gradient.
template <class T>
double backward_chunk(const Arch& a, const Params<T>& w, const std::vector<int>& labels,
                      int batch_total, Workspace<T>& ws, Params<T>& grad) {
    const int B = static_cast<int>(ws.P.rows());
    const int k = a.kernel;
    const int L1 = a.conv1_len(), L2 = a.conv2_len();
    const int F1 = a.conv1_filters, F2 = a.conv2_filters;

    using CMap = Eigen::Map<const RowMat<T>>;
    using Map = Eigen::Map<RowMat<T>>;
    const CMap W2(w.conv2_w.data(), F2, a.conv2_in());
    const CMap W3(w.fc1_w.data(), a.fc1, a.flat());
    const CMap W4(w.fc2_w.data(), a.fc2, a.fc1);
    const CMap W5(w.head_w.data(), a.n_classes, a.fc2);

    grad.resize(a);
    Map gW1(grad.conv1_w.data(), F1, k);
    Map gW2(grad.conv2_w.data(), F2, a.conv2_in());
    Map gW3(grad.fc1_w.data(), a.fc1, a.flat());
    Map gW4(grad.fc2_w.data(), a.fc2, a.fc1);
    Map gW5(grad.head_w.data(), a.n_classes, a.fc2);
    Eigen::Map<Eigen::Vector<T, Eigen::Dynamic>> gb1(grad.conv1_b.data(), F1),
        gb2(grad.conv2_b.data(), F2), gb3(grad.fc1_b.data(), a.fc1),
        gb4(grad.fc2_b.data(), a.fc2), gb5(grad.head_b.data(), a.n_classes);

    double loss = 0.0;
    ws.dZ5 = ws.P;
    const T inv_total = static_cast<T>(1.0 / static_cast<double>(batch_total));
    for (int b = 0; b < B; ++b) {
        const int y = labels[static_cast<size_t>(b)];
        loss -= std::log(std::max(static_cast<double>(ws.P(b, y)), 1e-300));
        ws.dZ5(b, y) -= T{1};
    }
    ws.dZ5 *= inv_total;

    gW5.noalias() = ws.dZ5.transpose() * ws.Act4;
    gb5.noalias() = ws.dZ5.colwise().sum().transpose();
    ws.dAct4.noalias() = ws.dZ5 * W5;

    ws.dZ4 = ws.dAct4.array() * ws.mask4.array() * (ws.Z4.array() > T{0}).template cast<T>();
    gW4.noalias() = ws.dZ4.transpose() * ws.Act3;
    gb4.noalias() = ws.dZ4.colwise().sum().transpose();
    ws.dAct3.noalias() = ws.dZ4 * W4;

    ws.dZ3 = ws.dAct3.array() * ws.mask3.array() * (ws.Z3.array() > T{0}).template cast<T>();
    const Eigen::Map<const RowMat<T>> flat(ws.Act2.data(), B, a.flat());
    gW3.noalias() = ws.dZ3.transpose() * flat;
    gb3.noalias() = ws.dZ3.colwise().sum().transpose();

    // dFlat back to the (b, t, c) view of Act2.
    RowMat<T> dflat;
    dflat.noalias() = ws.dZ3 * W3;  // B x flat
    const Eigen::Map<const RowMat<T>> dAct2(dflat.data(), static_cast<Eigen::Index>(B) * L2, F2);
    ws.dZ2 = dAct2.array() * (ws.Z2.array() > T{0}).template cast<T>();

    gW2.noalias() = ws.dZ2.transpose() * ws.A2;
    gb2.noalias() = ws.dZ2.colwise().sum().transpose();
    ws.dA2.noalias() = ws.dZ2 * W2;

    // col2im scatter-add back onto conv1 activations.
    ws.dAct1.setZero(static_cast<Eigen::Index>(B) * 2 * L1, F1);
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < L2; ++t) {
            const Eigen::Index src = static_cast<Eigen::Index>(b) * L2 + t;
            for (int r = 0; r < 2; ++r)
                for (int dt = 0; dt < k; ++dt)
                    ws.dAct1.row((static_cast<Eigen::Index>(b) * 2 + r) * L1 + t + dt) +=
                        ws.dA2.row(src).segment((r * k + dt) * F1, F1);
        }

    ws.dZ1 = ws.dAct1.array() * (ws.Z1.array() > T{0}).template cast<T>();
    gW1.noalias() = ws.dZ1.transpose() * ws.A1;
    gb1.noalias() = ws.dZ1.colwise().sum().transpose();
    return loss;
}

template <class T>
void add_params(Params<T>& into, const Params<T>& other) {
    auto add = [](std::vector<T>& a, const std::vector<T>& b) {
        for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    add(into.conv1_w, other.conv1_w); add(into.conv1_b, other.conv1_b);
    add(into.conv2_w, other.conv2_w); add(into.conv2_b, other.conv2_b);
    add(into.fc1_w, other.fc1_w);     add(into.fc1_b, other.fc1_b);
    add(into.fc2_w, other.fc2_w);     add(into.fc2_b, other.fc2_b);
    add(into.head_w, other.head_w);   add(into.head_b, other.head_b);
}

inline bool is_bias(const std::string& name) {
    return name.size() >= 2 && name.compare(name.size() - 2, 2, "_b") == 0;
}

// L2 penalty (lambda/2)*sum w^2 over weight matrices (biases exempt).
template <class T>
double l2_penalty(const Params<T>& w, double lambda) {
    double sum = 0.0;
    w.for_each([&](const std::string& name, const std::vector<T>& v) {
        if (is_bias(name)) return;
        for (const T x : v) sum += static_cast<double>(x) * static_cast<double>(x);
    });
    return 0.5 * lambda * sum;
}

template <class T>
struct AdamState {
    Params<T> m, v;
    long long t = 0;

    void init(const Arch& a) {
        m.resize(a);
        v.resize(a);
        t = 0;
    }
};

// One Adam step; the L2 term lambda*w joins the data gradient here so the
// regularizer is counted exactly once per step.
template <class T>
void adam_step(Params<T>& w, const Params<T>& grad, AdamState<T>& state, const Hyper& hp) {
    state.t += 1;
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));

    struct Slot {
        std::vector<T>* w;
        const std::vector<T>* g;
        std::vector<T>* m;
        std::vector<T>* v;
        bool bias;
    };
    std::vector<Slot> slots;
    {
        std::vector<std::vector<T>*> ws_, ms_, vs_;
        std::vector<const std::vector<T>*> gs_;
        std::vector<bool> bias_;
        w.for_each([&](const std::string& n, std::vector<T>& v_) { ws_.push_back(&v_); bias_.push_back(is_bias(n)); });
        grad.for_each([&](const std::string&, const std::vector<T>& v_) { gs_.push_back(&v_); });
        state.m.for_each([&](const std::string&, std::vector<T>& v_) { ms_.push_back(&v_); });
        state.v.for_each([&](const std::string&, std::vector<T>& v_) { vs_.push_back(&v_); });
        for (size_t i = 0; i < ws_.size(); ++i)
            slots.push_back({ws_[i], gs_[i], ms_[i], vs_[i], bias_[i] != 0});
    }

    for (Slot& s : slots) {
        std::vector<T>& wt = *s.w;
        const std::vector<T>& gt = *s.g;
        std::vector<T>& mt = *s.m;
        std::vector<T>& vt = *s.v;
        for (size_t i = 0; i < wt.size(); ++i) {
            double g = static_cast<double>(gt[i]);
            if (!s.bias) g += hp.l2_lambda * static_cast<double>(wt[i]);
            const double m = hp.beta1 * static_cast<double>(mt[i]) + (1.0 - hp.beta1) * g;
            const double v = hp.beta2 * static_cast<double>(vt[i]) + (1.0 - hp.beta2) * g * g;
            mt[i] = static_cast<T>(m);
            vt[i] = static_cast<T>(v);
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            wt[i] = static_cast<T>(static_cast<double>(wt[i]) -
                                   hp.learning_rate * mhat / (std::sqrt(vhat) + hp.epsilon));
        }
    }
}

// Glorot-uniform init, fixed tensor traversal order, biases zero.
template <class T>
void glorot_init(Params<T>& w, const Arch& a, uint64_t seed) {
    w.resize(a);
    Rng rng(seed, /*stream=*/0x696e6974ULL);
    auto fill = [&](std::vector<T>& v, int fan_in, int fan_out) {
        const double lim = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (T& x : v) x = static_cast<T>((rng.uniform() * 2.0 - 1.0) * lim);
    };
    fill(w.conv1_w, a.kernel, a.kernel * a.conv1_filters);
    fill(w.conv2_w, a.conv2_in(), 2 * a.kernel * a.conv2_filters);
    fill(w.fc1_w, a.flat(), a.fc1);
    fill(w.fc2_w, a.fc1, a.fc2);
    fill(w.head_w, a.fc2, a.n_classes);
}

// Full training objective (mean CE + L2 penalty) and its gradient for a
// small batch; single chunk, used directly by gradient-check tests.
template <class T>
double objective_and_gradient(const Arch& a, const Hyper& hp, const Params<T>& w,
                              const RowMat<T>& x, const std::vector<int>& labels,
                              bool train_mode, uint64_t seed,
                              const std::vector<uint64_t>& sample_keys,
                              Params<T>* grad = nullptr) {
    Workspace<T> ws;
    forward_chunk(a, hp, w, x, train_mode, seed, sample_keys, ws);
    const int batch_total = static_cast<int>(x.rows());
    Params<T> g;
    const double data_loss = backward_chunk(a, w, labels, batch_total, ws, g) / batch_total;
    if (grad) {
        *grad = std::move(g);
        // Fold the L2 term so the returned gradient matches the objective.
        size_t slot = 0;
        std::vector<std::vector<T>*> gs;
        grad->for_each([&](const std::string&, std::vector<T>& v) { gs.push_back(&v); });
        w.for_each([&](const std::string& name, const std::vector<T>& wv) {
            std::vector<T>& gv = *gs[slot++];
            if (!is_bias(name))
                for (size_t i = 0; i < wv.size(); ++i)
                    gv[i] += static_cast<T>(hp.l2_lambda) * wv[i];
        });
    }
    return data_loss + l2_penalty(w, hp.l2_lambda);
}

}  // namespace detail
}  // namespace oracle::cnn
