#include <benchmark/benchmark.h>

#include "oracle/cnn.hpp"
#include "oracle/rng.hpp"

using namespace oracle;

namespace {

std::vector<cnn::IqWindow> random_windows(int n, int width, int classes, uint64_t seed) {
    Rng rng(seed, 0);
    std::vector<cnn::IqWindow> out(static_cast<size_t>(n));
    for (auto& w : out) {
        w.values.resize(static_cast<size_t>(2 * width));
        for (auto& v : w.values) v = static_cast<float>(rng.gaussian());
        w.label = static_cast<int>(rng.below(static_cast<uint64_t>(classes)));
    }
    return out;
}

void BM_ForwardBatch(benchmark::State& state) {
    cnn::Arch arch;
    arch.n_classes = 8;
    const cnn::CnnModel model = cnn::init_model(arch, cnn::Hyper{}, 1);
    const auto batch = random_windows(static_cast<int>(state.range(0)), arch.input_w, 8, 2);
    for (auto _ : state) benchmark::DoNotOptimize(cnn::forward(model, batch, false));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TrainEpoch(benchmark::State& state) {
    cnn::Arch arch;
    arch.n_classes = 4;
    const auto train = random_windows(static_cast<int>(state.range(0)), arch.input_w, 4, 3);
    const auto val = random_windows(64, arch.input_w, 4, 4);
    cnn::TrainRecipe recipe;
    recipe.max_epochs = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cnn::train(arch, cnn::Hyper{}, train, val, recipe));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ForwardBatch)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainEpoch)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
