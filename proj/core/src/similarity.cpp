#include "oracle/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "oracle/errors.hpp"
#include "oracle/parallel.hpp"
#include "oracle/rng.hpp"

namespace oracle::pattern {

double solve_assignment(const std::vector<double>& cost, int n,
                        std::vector<int>* row_to_col) {
    if (n <= 0 || cost.size() != static_cast<size_t>(n) * static_cast<size_t>(n))
        throw InvalidInput("solve_assignment: bad matrix");

    // Jonker-Volgenant / Kuhn-Munkres with shortest augmenting paths,
    // 1-based bookkeeping. u/v are the dual potentials.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<size_t>(n) + 1, 0);  // col -> row
    std::vector<int> way(static_cast<size_t>(n) + 1, 0);

    auto c = [&](int i, int j) {  // 1-based accessor
        return cost[static_cast<size_t>(i - 1) * static_cast<size_t>(n) +
                    static_cast<size_t>(j - 1)];
    };

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<size_t>(n) + 1, 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            const int i0 = match[static_cast<size_t>(j0)];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double cur = c(i0, j) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0);
    }

    double total = 0.0;
    if (row_to_col) row_to_col->assign(static_cast<size_t>(n), -1);
    for (int j = 1; j <= n; ++j) {
        const int i = match[static_cast<size_t>(j)];
        if (i > 0) {
            total += c(i, j);
            if (row_to_col) (*row_to_col)[static_cast<size_t>(i - 1)] = j - 1;
        }
    }
    return total;
}

namespace {

std::vector<double> distance_matrix(const Pattern& a, const Pattern& b) {
    const size_t n = a.size();
    std::vector<double> d(n * n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            d[i * n + j] = std::abs(a.points[i] - b.points[j]);
    return d;
}

void check_finite(const Pattern& p, const char* who) {
    for (const cplx& z : p.points)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw InvalidInput(std::string(who) + ": non-finite point");
}

}  // namespace

double emd(const Pattern& a, const Pattern& b) {
    if (a.size() != b.size()) throw InvalidInput("emd: pattern sizes differ");
    if (a.size() == 0) throw InvalidInput("emd: empty pattern");
    check_finite(a, "emd");
    check_finite(b, "emd");
    const int n = static_cast<int>(a.size());
    const double total = solve_assignment(distance_matrix(a, b), n);
    return total / static_cast<double>(n);
}

double emd_bruteforce(const Pattern& a, const Pattern& b) {
    if (a.size() != b.size()) throw InvalidInput("emd_bruteforce: pattern sizes differ");
    if (a.size() == 0) throw InvalidInput("emd_bruteforce: empty pattern");
    if (a.size() > 8) throw InvalidInput("emd_bruteforce: more than 8 points");
    const size_t n = a.size();
    const std::vector<double> d = distance_matrix(a, b);
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        double sum = 0.0;
        for (size_t i = 0; i < n; ++i) sum += d[i * n + perm[i]];
        best = std::min(best, sum);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(n);
}

Pattern extract_pattern(const std::vector<cplx>& equalized, int n_pattern,
                        uint64_t seed) {
    if (n_pattern <= 0) throw InvalidInput("extract_pattern: n_pattern <= 0");
    if (equalized.size() < static_cast<size_t>(n_pattern))
        throw InvalidInput("extract_pattern: fewer symbols than n_pattern");

    const size_t total = equalized.size();
    const size_t want = static_cast<size_t>(n_pattern);

    // Seeded selection sampling (Knuth's Algorithm S): each index kept with
    // probability (still needed)/(still available); preserves input order.
    Rng rng(seed, /*stream=*/0x70617474ULL);
    Pattern p;
    p.points.reserve(want);
    size_t need = want;
    for (size_t k = 0; k < total && need > 0; ++k) {
        const size_t remaining = total - k;
        if (rng.below(remaining) < need) {
            p.points.push_back(equalized[k]);
            --need;
        }
    }
    return p;
}

std::string PatternLabel::str() const {
    return "d" + std::to_string(device) + "/c" + std::to_string(channel) + "/" + impairment;
}

EmdMatrix emd_matrix(const std::vector<Pattern>& patterns,
                     const std::vector<PatternLabel>& labels) {
    if (patterns.empty()) throw InvalidInput("emd_matrix: no patterns");
    if (patterns.size() != labels.size())
        throw InvalidInput("emd_matrix: label count mismatch");
    const size_t n = patterns.size();
    for (const Pattern& p : patterns)
        if (p.size() != patterns[0].size())
            throw InvalidInput("emd_matrix: patterns differ in cardinality");

    EmdMatrix m;
    m.labels = labels;
    m.values.assign(n * n, 0.0);

    // Strict upper triangle, flattened.
    std::vector<std::pair<size_t, size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    parallel_for(pairs.size(), [&](size_t k) {
        const auto [i, j] = pairs[k];
        const double d = emd(patterns[i], patterns[j]);
        m.values[i * n + j] = d;
        m.values[j * n + i] = d;
    });
    return m;
}

void write_emd_csv(const std::string& path, const EmdMatrix& m) {
    std::ofstream out(path);
    if (!out) throw FileError("write_emd_csv: cannot open " + path);
    out << "label";
    for (const PatternLabel& l : m.labels) out << ',' << l.str();
    out << '\n';
    out.precision(10);
    for (size_t i = 0; i < m.size(); ++i) {
        out << m.labels[i].str();
        for (size_t j = 0; j < m.size(); ++j) out << ',' << m.at(i, j);
        out << '\n';
    }
}

}  // namespace oracle::pattern
