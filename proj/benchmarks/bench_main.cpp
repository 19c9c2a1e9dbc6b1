#include "hetnet/channel.hpp"
#include "hetnet/nn/allocator.hpp"
#include "hetnet/nn/training.hpp"
#include "hetnet/solvers.hpp"

#include <benchmark/benchmark.h>

using namespace hetnet;

static void BM_ExhaustiveSolve(benchmark::State& state) {
    const NetworkConfig cfg;
    const int levels = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        state.PauseTiming();
        const auto h = channel::draw_realization(cfg, seed++);
        state.ResumeTiming();
        benchmark::DoNotOptimize(solvers::exhaustive_solve(h, cfg, levels));
    }
}
BENCHMARK(BM_ExhaustiveSolve)->Arg(4)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void infer(benchmark::State& state, nn::Model model) {
    const NetworkConfig cfg;
    const solvers::AssignmentCatalog catalog(cfg);
    model.init_params(1);
    model.normalization = {-11.0, 1.5};
    model.grid_levels = 10;
    const auto h = channel::draw_realization(cfg, 3);
    for (auto _ : state) benchmark::DoNotOptimize(nn::infer_allocation(model, h, cfg, catalog));
}
BENCHMARK_CAPTURE(infer, cnn, nn::build_cnn(NetworkConfig{}))->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(infer, dnn, nn::build_dnn(NetworkConfig{}))->Unit(benchmark::kMicrosecond);

static void train_step(benchmark::State& state, nn::Model model) {
    model.init_params(2);
    const std::size_t batch = static_cast<std::size_t>(state.range(0));
    Rng rng(4);
    std::vector<double> x(batch * model.spec().input.size());
    for (double& v : x) v = standard_normal(rng);
    std::vector<nn::Target> t(batch, nn::Target{3, std::vector<double>(6, 0.4)});
    nn::AdamState adam(model.params().size());
    const nn::TrainingConfig tc;
    for (auto _ : state) {
        const auto lg = nn::backward(model, x, t);
        nn::adam_step(model.params(), lg.grad, adam, tc);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK_CAPTURE(train_step, cnn, nn::build_cnn(NetworkConfig{}))->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(train_step, dnn, nn::build_dnn(NetworkConfig{}))->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_RandomPower(benchmark::State& state) {
    const NetworkConfig cfg;
    const auto h = channel::draw_realization(cfg, 5);
    Rng rng(6);
    for (auto _ : state) benchmark::DoNotOptimize(solvers::random_power(h, cfg, rng));
}
BENCHMARK(BM_RandomPower);

static void BM_MaxPower(benchmark::State& state) {
    const NetworkConfig cfg;
    const auto h = channel::draw_realization(cfg, 7);
    for (auto _ : state) benchmark::DoNotOptimize(solvers::max_power(h, cfg));
}
BENCHMARK(BM_MaxPower);

BENCHMARK_MAIN();
