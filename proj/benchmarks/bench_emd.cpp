#include <benchmark/benchmark.h>

#include "oracle/rng.hpp"
#include "oracle/similarity.hpp"

using namespace oracle;

namespace {

pattern::Pattern cloud(int n, uint64_t seed) {
    Rng rng(seed, 0);
    pattern::Pattern p;
    for (int k = 0; k < n; ++k) p.points.push_back(rng.cgaussian(1.0));
    return p;
}

// Budget: the n=64 solve should stay under 10 ms on desk hardware.
void BM_EmdAssignment(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const pattern::Pattern a = cloud(n, 1);
    const pattern::Pattern b = cloud(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(pattern::emd(a, b));
}

void BM_EmdBruteforce(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const pattern::Pattern a = cloud(n, 1);
    const pattern::Pattern b = cloud(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(pattern::emd_bruteforce(a, b));
}

}  // namespace

BENCHMARK(BM_EmdAssignment)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EmdBruteforce)->Arg(6)->Arg(7)->Unit(benchmark::kMicrosecond);
