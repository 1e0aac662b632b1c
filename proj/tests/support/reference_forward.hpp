#pragma once

// Straightforward loop-based forward pass (eval mode, double precision),
// kept deliberately independent of the production GEMM path so it can act
// as its oracle.

#include <cmath>
#include <vector>

#include "oracle/cnn.hpp"

namespace oracle::testsupport {

inline std::vector<double> reference_forward(const cnn::CnnModel& model,
                                             const cnn::IqWindow& win) {
    const cnn::Arch& a = model.arch;
    const auto& p = model.params;
    const int W = a.input_w, k = a.kernel;
    const int L1 = a.conv1_len(), L2 = a.conv2_len();
    const int F1 = a.conv1_filters, F2 = a.conv2_filters;

    auto x = [&](int r, int t) { return static_cast<double>(win.values[static_cast<size_t>(r * W + t)]); };

    // conv1 + relu: act1[r][t][c]
    std::vector<double> act1(static_cast<size_t>(2 * L1 * F1), 0.0);
    auto a1 = [&](int r, int t, int c) -> double& {
        return act1[(static_cast<size_t>(r) * L1 + t) * F1 + c];
    };
    for (int r = 0; r < 2; ++r)
        for (int t = 0; t < L1; ++t)
            for (int c = 0; c < F1; ++c) {
                double z = static_cast<double>(p.conv1_b[static_cast<size_t>(c)]);
                for (int dt = 0; dt < k; ++dt)
                    z += static_cast<double>(p.conv1_w[static_cast<size_t>(c * k + dt)]) * x(r, t + dt);
                a1(r, t, c) = z > 0.0 ? z : 0.0;
            }

    // conv2 + relu: act2[t][f], kernel spans both rows and all F1 channels
    std::vector<double> act2(static_cast<size_t>(L2 * F2), 0.0);
    for (int t = 0; t < L2; ++t)
        for (int f = 0; f < F2; ++f) {
            double z = static_cast<double>(p.conv2_b[static_cast<size_t>(f)]);
            for (int r = 0; r < 2; ++r)
                for (int dt = 0; dt < k; ++dt)
                    for (int c = 0; c < F1; ++c)
                        z += static_cast<double>(
                                 p.conv2_w[static_cast<size_t>(f) * a.conv2_in() +
                                           (static_cast<size_t>(r) * k + dt) * F1 + c]) *
                             a1(r, t + dt, c);
            act2[static_cast<size_t>(t) * F2 + f] = z > 0.0 ? z : 0.0;
        }

    // fc1 + relu (flat index t*F2+f)
    std::vector<double> act3(static_cast<size_t>(a.fc1), 0.0);
    for (int h = 0; h < a.fc1; ++h) {
        double z = static_cast<double>(p.fc1_b[static_cast<size_t>(h)]);
        for (int n = 0; n < a.flat(); ++n)
            z += static_cast<double>(p.fc1_w[static_cast<size_t>(h) * a.flat() + n]) *
                 act2[static_cast<size_t>(n)];
        act3[static_cast<size_t>(h)] = z > 0.0 ? z : 0.0;
    }

    // fc2 + relu
    std::vector<double> act4(static_cast<size_t>(a.fc2), 0.0);
    for (int h = 0; h < a.fc2; ++h) {
        double z = static_cast<double>(p.fc2_b[static_cast<size_t>(h)]);
        for (int n = 0; n < a.fc1; ++n)
            z += static_cast<double>(p.fc2_w[static_cast<size_t>(h) * a.fc1 + n]) *
                 act3[static_cast<size_t>(n)];
        act4[static_cast<size_t>(h)] = z > 0.0 ? z : 0.0;
    }

    // head + softmax
    std::vector<double> logits(static_cast<size_t>(a.n_classes), 0.0);
    for (int c = 0; c < a.n_classes; ++c) {
        double z = static_cast<double>(p.head_b[static_cast<size_t>(c)]);
        for (int n = 0; n < a.fc2; ++n)
            z += static_cast<double>(p.head_w[static_cast<size_t>(c) * a.fc2 + n]) *
                 act4[static_cast<size_t>(n)];
        logits[static_cast<size_t>(c)] = z;
    }
    double zmax = logits[0];
    for (const double z : logits) zmax = std::max(zmax, z);
    double sum = 0.0;
    std::vector<double> probs(logits.size());
    for (size_t c = 0; c < logits.size(); ++c) {
        probs[c] = std::exp(logits[c] - zmax);
        sum += probs[c];
    }
    for (double& v : probs) v /= sum;
    return probs;
}

}  // namespace oracle::testsupport
