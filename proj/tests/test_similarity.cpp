#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracle/baseband.hpp"
#include "oracle/errors.hpp"
#include "oracle/rng.hpp"
#include "oracle/similarity.hpp"

using namespace oracle;
using namespace oracle::pattern;
using oracle::baseband::cplx;

namespace {

Pattern random_cloud(int n, Rng& rng, double scale = 1.0, cplx shift = {0.0, 0.0}) {
    Pattern p;
    p.points.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) p.points.push_back(rng.cgaussian(scale) + shift);
    return p;
}

}  // namespace

TEST_CASE("EMD of a pattern with itself is zero") {
    Rng rng(1, 0);
    const Pattern p = random_cloud(16, rng);
    CHECK(emd(p, p) == doctest::Approx(0.0).epsilon(1e-12));
    const Pattern q = random_cloud(5, rng);
    CHECK(emd_bruteforce(q, q) == doctest::Approx(0.0));
}

TEST_CASE("single-point EMD is the Euclidean distance") {
    const Pattern a{{{0.0, 0.0}}};
    const Pattern b{{{3.0, 4.0}}};
    CHECK(emd(a, b) == doctest::Approx(5.0));
}

TEST_CASE("two-point crossing example resolves to 1.0 per point") {
    // identity pairing costs 1+1=2; crossed pairing costs 2*sqrt(2).
    const Pattern a{{{0.0, 0.0}, {1.0, 0.0}}};
    const Pattern b{{{0.0, 1.0}, {1.0, 1.0}}};
    CHECK(emd(a, b) == doctest::Approx(1.0));
    CHECK(emd_bruteforce(a, b) == doctest::Approx(1.0));
}

TEST_CASE("size mismatches and oversized brute force are rejected") {
    Rng rng(2, 0);
    const Pattern a = random_cloud(4, rng);
    const Pattern b = random_cloud(5, rng);
    CHECK_THROWS_AS(emd(a, b), InvalidInput);
    CHECK_THROWS_AS(emd_bruteforce(random_cloud(9, rng), random_cloud(9, rng)), InvalidInput);
}

TEST_CASE("assignment solver agrees with brute force on random 7-point clouds") {
    Rng rng(3, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const Pattern a = random_cloud(7, rng);
        const Pattern b = random_cloud(7, rng);
        CHECK(emd(a, b) == doctest::Approx(emd_bruteforce(a, b)).epsilon(1e-9));
    }
}

TEST_CASE("metric axioms hold on random triples") {
    Rng rng(4, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const Pattern a = random_cloud(12, rng);
        const Pattern b = random_cloud(12, rng);
        const Pattern c = random_cloud(12, rng);
        const double ab = emd(a, b), ba = emd(b, a);
        const double ac = emd(a, c), bc = emd(b, c);
        CHECK(ab >= 0.0);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab <= ac + bc + 1e-9);  // triangle via c
    }
}

TEST_CASE("translation bounds per-point EMD by the shift length") {
    Rng rng(5, 0);
    const cplx t{0.3, -0.4};
    for (int trial = 0; trial < 20; ++trial) {
        Pattern a = random_cloud(24, rng);
        Pattern b = a;
        for (auto& p : b.points) p += t;
        const double d = emd(a, b);
        CHECK(d <= std::abs(t) + 1e-9);
        CHECK(d > 0.0);
    }
}

TEST_CASE("extract_pattern keeps everything when sizes match and is seeded") {
    std::vector<cplx> sym{{1, 1}, {2, 2}, {3, 3}, {4, 4}};
    const Pattern all = extract_pattern(sym, 4, 9);
    CHECK(all.points == sym);

    std::vector<cplx> big(512);
    Rng rng(6, 0);
    for (auto& s : big) s = rng.cgaussian(1.0);
    const Pattern p1 = extract_pattern(big, 64, 42);
    const Pattern p2 = extract_pattern(big, 64, 42);
    const Pattern p3 = extract_pattern(big, 64, 43);
    CHECK(p1.points == p2.points);
    CHECK(p1.points != p3.points);
    CHECK_THROWS_AS(extract_pattern(sym, 5, 1), InvalidInput);
}

TEST_CASE("patterns from a clean QPSK stream sit on the four ideal points") {
    using namespace oracle::baseband;
    Rng rng(7, 0);
    std::vector<uint8_t> bits(2048);
    for (auto& b : bits) b = static_cast<uint8_t>(rng.below(2));
    const auto symbols = modulate(bits, Constellation::qpsk);
    const Pattern p = extract_pattern(symbols, 64, 11);
    const auto ideal = constellation_points(Constellation::qpsk);
    for (const auto& pt : p.points) {
        double best = 1e9;
        for (const auto& c : ideal) best = std::min(best, std::abs(pt - c));
        CHECK(best < 1e-12);
    }
}

TEST_CASE("emd_matrix is symmetric, zero-diagonal and labeled") {
    Rng rng(8, 0);
    std::vector<Pattern> pats;
    std::vector<PatternLabel> labels;
    for (int k = 0; k < 5; ++k) {
        pats.push_back(random_cloud(16, rng));
        labels.push_back({k % 2, k / 2, "imp" + std::to_string(k)});
    }
    const EmdMatrix m = emd_matrix(pats, labels);
    for (size_t i = 0; i < m.size(); ++i) {
        CHECK(m.at(i, i) == 0.0);
        for (size_t j = 0; j < m.size(); ++j) CHECK(m.at(i, j) == m.at(j, i));
    }

    const EmdMatrix single = emd_matrix({pats[0]}, {labels[0]});
    CHECK(single.size() == 1);
    CHECK(single.at(0, 0) == 0.0);

    const EmdMatrix copies = emd_matrix({pats[0], pats[0], pats[0]},
                                        {labels[0], labels[1], labels[2]});
    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 3; ++j) CHECK(copies.at(i, j) == doctest::Approx(0.0));
}

TEST_CASE("same-shift clouds are closer than differently-shifted ones") {
    // Miniature of the invariance experiment: two "impairments" modeled as
    // different translations, sampled twice with independent jitter.
    Rng rng(9, 0);
    std::vector<Pattern> pats;
    std::vector<PatternLabel> labels;
    const cplx shifts[2] = {{0.0, 0.0}, {0.45, 0.2}};
    for (int imp = 0; imp < 2; ++imp)
        for (int rep = 0; rep < 3; ++rep) {
            Pattern p = random_cloud(32, rng, 0.01, shifts[imp]);
            pats.push_back(std::move(p));
            labels.push_back({rep, 0, "imp" + std::to_string(imp)});
        }
    const EmdMatrix m = emd_matrix(pats, labels);
    double same = 0.0, diff = 0.0;
    int ns = 0, nd = 0;
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = i + 1; j < m.size(); ++j) {
            if (labels[i].impairment == labels[j].impairment) { same += m.at(i, j); ++ns; }
            else { diff += m.at(i, j); ++nd; }
        }
    CHECK(same / ns < diff / nd);
}

TEST_CASE("EMD CSV has one labeled row and column per pattern") {
    Rng rng(10, 0);
    std::vector<Pattern> pats{random_cloud(8, rng), random_cloud(8, rng)};
    std::vector<PatternLabel> labels{{0, 0, "a"}, {1, 0, "b"}};
    const std::string path =
        (std::filesystem::temp_directory_path() / "oracle_emd_test.csv").string();
    write_emd_csv(path, emd_matrix(pats, labels));
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "label,d0/c0/a,d1/c0/b");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 2);
    std::filesystem::remove(path);
}
