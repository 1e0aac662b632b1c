#include <benchmark/benchmark.h>

#include "oracle/baseband.hpp"
#include "oracle/impairments.hpp"
#include "oracle/rng.hpp"

using namespace oracle;
using namespace oracle::baseband;

namespace {

void BM_ModulateDemodulate(benchmark::State& state) {
    Rng rng(1, 0);
    std::vector<uint8_t> bits(static_cast<size_t>(state.range(0)));
    for (auto& b : bits) b = static_cast<uint8_t>(rng.below(2));
    for (auto _ : state) {
        const auto sym = modulate(bits, Constellation::qpsk);
        benchmark::DoNotOptimize(demodulate(sym, Constellation::qpsk));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ChannelAndEqualize(benchmark::State& state) {
    const auto preamble = make_preamble(1, 64);
    Rng rng(1, 1);
    const Frame frame = make_frame(preamble, static_cast<int>(state.range(0)),
                                   Constellation::qpsk, rng);
    ChannelRealization ch;
    ch.gain = {0.8, 0.3};
    ch.noise_power_db = -25.0;
    ch.seed = 7;
    for (auto _ : state) {
        const auto rx = apply_channel(frame.samples(), ch);
        benchmark::DoNotOptimize(estimate_and_equalize(rx, preamble));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ImpairmentChain(benchmark::State& state) {
    Rng rng(2, 0);
    std::vector<cplx> s(static_cast<size_t>(state.range(0)));
    for (auto& x : s) x = rng.cgaussian(1.0);
    impair::ImpairmentConfig cfg;
    cfg.iq = {0.05, 0.1};
    cfg.dc.offset = {0.01, -0.02};
    for (auto _ : state) benchmark::DoNotOptimize(impair::apply_impairment(s, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ModulateDemodulate)->Arg(4096)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ChannelAndEqualize)->Arg(1024)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ImpairmentChain)->Arg(4096)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
