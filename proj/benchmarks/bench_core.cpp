#include <vector>

#include <benchmark/benchmark.h>

#include "axgen/areamodel.hpp"
#include "axgen/datio.hpp"
#include "axgen/evolver.hpp"
#include "axgen/netlist.hpp"
#include "axgen/random.hpp"

using namespace axgen;

namespace {

// All-ones masks with alternating signs and small shifts; the densest case.
qarith::ApproxMlp dense_mlp(const std::vector<int>& topo) {
    auto mlp = qarith::make_mlp(topo);
    int i = 0;
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        const int w = l == 0 ? mlp.config.w_in : mlp.config.w_hidden;
        for (auto& n : mlp.layers[l]) {
            for (auto& s : n.inputs) {
                s.mask = (1u << w) - 1;
                s.sign = i % 3 == 0 ? -1 : 1;
                s.shift = i % 3;
                ++i;
            }
            n.bias = (i % 7) - 3;
        }
    }
    return mlp;
}

datio::QuantDataset random_dataset(std::size_t rows, std::size_t features, int classes) {
    datio::QuantDataset ds;
    ds.w_in = 4;
    Rng rng(7);
    for (std::size_t f = 0; f < features; ++f) ds.feature_names.push_back("f" + std::to_string(f));
    for (int c = 0; c < classes; ++c) ds.class_names.push_back(std::to_string(c));
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<std::uint32_t> row;
        for (std::size_t f = 0; f < features; ++f) row.push_back(static_cast<std::uint32_t>(rng.below(16)));
        ds.features.push_back(std::move(row));
        ds.labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))));
        (r % 10 < 7 ? ds.split.train : ds.split.test).push_back(r);
    }
    return ds;
}

void BM_Forward(benchmark::State& state) {
    const auto mlp = dense_mlp({10, 3, 2});
    const std::vector<std::uint32_t> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    for (auto _ : state) benchmark::DoNotOptimize(qarith::forward(mlp, x));
}
BENCHMARK(BM_Forward);

void BM_Predict(benchmark::State& state) {
    const auto mlp = dense_mlp({10, 3, 2});
    const std::vector<std::uint32_t> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    qarith::Workspace ws;
    for (auto _ : state) benchmark::DoNotOptimize(qarith::predict(mlp, x, ws));
}
BENCHMARK(BM_Predict);

void BM_MlpArea(benchmark::State& state) {
    const auto mlp = dense_mlp({11, 2, 6});
    for (auto _ : state) benchmark::DoNotOptimize(area::mlp_area(mlp));
}
BENCHMARK(BM_MlpArea);

void BM_FaCountColumn(benchmark::State& state) {
    const area::ColumnProfile p{{static_cast<int>(state.range(0))}, 0};
    for (auto _ : state) benchmark::DoNotOptimize(area::fa_count(p));
}
BENCHMARK(BM_FaCountColumn)->Arg(8)->Arg(64);

void BM_BuildNetlist(benchmark::State& state) {
    const auto mlp = dense_mlp({10, 3, 2});
    for (auto _ : state) benchmark::DoNotOptimize(netlist::build(mlp));
}
BENCHMARK(BM_BuildNetlist);

void BM_SimulateBatch(benchmark::State& state) {
    const auto mlp = dense_mlp({4, 3, 2});
    const auto net = netlist::build(mlp);
    std::vector<std::vector<std::uint32_t>> xs;
    Rng rng(3);
    for (int i = 0; i < 4096; ++i)
        xs.push_back({static_cast<std::uint32_t>(rng.below(16)), static_cast<std::uint32_t>(rng.below(16)),
                      static_cast<std::uint32_t>(rng.below(16)), static_cast<std::uint32_t>(rng.below(16))});
    for (auto _ : state) benchmark::DoNotOptimize(netlist::simulate_batch(net, xs));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}
BENCHMARK(BM_SimulateBatch);

void BM_Evaluate(benchmark::State& state) {
    const auto ds = random_dataset(569, 10, 2);
    const auto mlp = dense_mlp({10, 3, 2});
    evolver::GaConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(evolver::evaluate(mlp, ds, cfg));
}
BENCHMARK(BM_Evaluate);

}  // namespace

BENCHMARK_MAIN();
