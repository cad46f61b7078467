#include <random>

#include <benchmark/benchmark.h>

#include "support.hpp"
#include "tabtax/owl.hpp"
#include "tabtax/stats.hpp"
#include "tabtax/taxonomy.hpp"

using namespace tabtax;

namespace {

void BM_FilterRows(benchmark::State& state) {
    const auto rows = static_cast<std::size_t>(state.range(0));
    const auto table = test_support::synthetic_table(rows, 4, 5);
    RowSet all(rows);
    for (std::size_t i = 0; i < rows; ++i) all[i] = static_cast<RowId>(i);
    const std::vector<Restriction> rs{{"x0", RestrictionOp::lt, 5.0},
                                      {"c", RestrictionOp::in, std::vector<std::string>{"a", "c"}}};
    for (auto _ : state) benchmark::DoNotOptimize(filter_rows(*table, all, rs).size());
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FilterRows)->Arg(10000)->Arg(100000);

Taxonomy random_taxonomy(std::size_t rows, std::uint64_t seed) {
    const auto table = test_support::synthetic_table(rows, 4, seed);
    std::mt19937_64 rng(seed);
    Taxonomy tax(table);
    test_support::grow_random_taxonomy(tax, rng, 40);
    return tax;
}

void BM_GrowTaxonomy(benchmark::State& state) {
    const auto table = test_support::synthetic_table(10000, 4, 6);
    for (auto _ : state) {
        std::mt19937_64 rng(6);
        Taxonomy tax(table);
        test_support::grow_random_taxonomy(tax, rng, 40);
        benchmark::DoNotOptimize(tax.size());
    }
}
BENCHMARK(BM_GrowTaxonomy)->Unit(benchmark::kMillisecond);

void BM_ExportTurtle(benchmark::State& state) {
    const auto tax = random_taxonomy(2000, 7);
    for (auto _ : state) benchmark::DoNotOptimize(export_turtle(tax).size());
}
BENCHMARK(BM_ExportTurtle)->Unit(benchmark::kMillisecond);

void BM_ImportTurtle(benchmark::State& state) {
    const auto text = export_turtle(random_taxonomy(2000, 8));
    for (auto _ : state) benchmark::DoNotOptimize(import_turtle(text).classes.size());
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ImportTurtle)->Unit(benchmark::kMillisecond);

void BM_Stats(benchmark::State& state) {
    const auto sk = skeleton_of(random_taxonomy(2000, 9));
    for (auto _ : state) benchmark::DoNotOptimize(compute_stats(sk).levels);
}
BENCHMARK(BM_Stats);

}  // namespace
