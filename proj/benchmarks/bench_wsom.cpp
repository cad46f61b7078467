#include <random>

#include <benchmark/benchmark.h>

#include "support.hpp"
#include "tabtax/discovery.hpp"
#include "tabtax/wsom.hpp"

using namespace tabtax;

namespace {

FeatureMatrix gaussian(std::size_t rows, std::size_t dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(rows * dims);
    for (auto& x : v) x = n(rng);
    return make_feature_matrix(dims, std::move(v));
}

void BM_Bmu(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const auto data = gaussian(256, 12, 1);
    TrainConfig cfg;
    cfg.side = side;
    const auto map = init_map(cfg, data);
    const auto w = FeatureWeights::uniform(12);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bmu(map, w, data.row(i)));
        i = (i + 1) % data.size();
    }
}
BENCHMARK(BM_Bmu)->Arg(4)->Arg(8)->Arg(10);

void BM_WeightStep(benchmark::State& state) {
    const auto data = gaussian(32, 12, 2);
    TrainConfig cfg;
    cfg.side = 8;
    const auto map = init_map(cfg, data);
    std::vector<std::size_t> batch(32);
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
    auto w = FeatureWeights::uniform(12);
    for (auto _ : state) {
        w = weight_step(w, map, data, batch, 0.05, 1e-3);
        benchmark::DoNotOptimize(w.w.data());
    }
}
BENCHMARK(BM_WeightStep);

void BM_Train(benchmark::State& state) {
    const auto data = gaussian(static_cast<std::size_t>(state.range(0)), 8, 3);
    TrainConfig cfg;
    cfg.side = 8;
    cfg.epochs = 10;
    for (auto _ : state) benchmark::DoNotOptimize(train(data, cfg).weights.w.data());
    state.SetItemsProcessed(state.iterations() * state.range(0) * 10);
}
BENCHMARK(BM_Train)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Discover(benchmark::State& state) {
    const auto rows = static_cast<std::size_t>(state.range(0));
    const auto table = test_support::synthetic_table(rows, 6, 4);
    RowSet all(rows);
    for (std::size_t i = 0; i < rows; ++i) all[i] = static_cast<RowId>(i);
    DiscoveryConfig cfg;
    cfg.train.side = 8;
    cfg.train.epochs = 10;
    for (auto _ : state) benchmark::DoNotOptimize(discover(*table, all, cfg).proposals.size());
}
BENCHMARK(BM_Discover)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
