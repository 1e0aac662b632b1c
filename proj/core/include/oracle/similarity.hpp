#pragma once

#include <string>
#include <vector>

#include "oracle/baseband.hpp"

namespace oracle::pattern {

using baseband::cplx;

// Fixed-size cloud of constellation points used as an impairment signature.
struct Pattern {
    std::vector<cplx> points;

    size_t size() const { return points.size(); }
};

// Mean per-point earth mover's distance between equal-size clouds:
//   min over bijections f of sum |x - f(x)|, divided by |a|.
// Solved exactly as a linear assignment problem in O(n^3).
double emd(const Pattern& a, const Pattern& b);

// Same quantity by enumerating all |a|! bijections; |a| <= 8.
double emd_bruteforce(const Pattern& a, const Pattern& b);

// Exact rectangular-cost assignment on a square matrix (Jonker-Volgenant
// shortest augmenting path). Returns the minimum total cost; row_to_col
// receives the optimal assignment when non-null.
double solve_assignment(const std::vector<double>& cost, int n,
                        std::vector<int>* row_to_col = nullptr);

// Deterministic seeded uniform subsample of n_pattern symbols (without
// replacement, input order preserved).
Pattern extract_pattern(const std::vector<cplx>& equalized, int n_pattern,
                        uint64_t seed);

struct PatternLabel {
    int device = 0;
    int channel = 0;
    std::string impairment;

    std::string str() const;
};

struct EmdMatrix {
    std::vector<PatternLabel> labels;
    std::vector<double> values;  // row-major, n x n

    size_t size() const { return labels.size(); }
    double at(size_t i, size_t j) const { return values[i * labels.size() + j]; }
};

// Pairwise EMD over labeled patterns; symmetric with a zero diagonal.
// Assembly is parallel over the upper triangle.
EmdMatrix emd_matrix(const std::vector<Pattern>& patterns,
                     const std::vector<PatternLabel>& labels);

void write_emd_csv(const std::string& path, const EmdMatrix& m);

}  // namespace oracle::pattern
