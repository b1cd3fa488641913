// Serial reference vs OpenMP paths of the data-parallel kernels.
#include <benchmark/benchmark.h>

#include "sop/gp.hpp"
#include "sop/kernels.hpp"
#include "sop/rng.hpp"
#include "sop/worldgen.hpp"

namespace {

using sop::ExecPolicy;

const sop::GeneratedWorld& l2_world() {
    static const sop::GeneratedWorld w = sop::generate_world(sop::ComplexityLevel::L2, 11);
    return w;
}

ExecPolicy policy_of(const benchmark::State& state) {
    return state.range(0) == 0 ? ExecPolicy::Serial : ExecPolicy::Parallel;
}

void BM_GridValues(benchmark::State& state) {
    const auto& w = l2_world().world;
    const sop::kernels::Grid grid(w.bounds, static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(sop::kernels::grid_values(w, grid, policy_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}

void BM_GridLocalMaxima(benchmark::State& state) {
    const auto& w = l2_world().world;
    const sop::kernels::Grid grid(w.bounds, static_cast<int>(state.range(1)));
    const auto values = sop::kernels::grid_values(w, grid, ExecPolicy::Serial);
    for (auto _ : state)
        benchmark::DoNotOptimize(sop::kernels::grid_local_maxima(values, grid, policy_of(state)));
}

void BM_AnalyzeWorld(benchmark::State& state) {
    const auto& w = l2_world().world;
    for (auto _ : state) benchmark::DoNotOptimize(sop::analyze_world(w, 201, policy_of(state)));
}

void BM_GpPredict(benchmark::State& state) {
    const auto& w = l2_world().world;
    sop::Philox rng(3);
    const int n = 96;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.uniform(-1000, 1000);
        x(i, 1) = rng.uniform(-1000, 1000);
        const double p[2] = {x(i, 0), x(i, 1)};
        y(i) = sop::evaluate_unchecked(w, p);
    }
    const sop::GaussianProcess gp(x, y, Eigen::Vector2d(150.0, 150.0), 1e-8);
    Eigen::MatrixXd pool(static_cast<Eigen::Index>(state.range(1)), 2);
    for (Eigen::Index i = 0; i < pool.rows(); ++i) {
        pool(i, 0) = rng.uniform(-1000, 1000);
        pool(i, 1) = rng.uniform(-1000, 1000);
    }
    for (auto _ : state) benchmark::DoNotOptimize(gp.predict(pool, policy_of(state)));
    state.SetItemsProcessed(state.iterations() * pool.rows());
}

}  // namespace

BENCHMARK(BM_GridValues)->ArgsProduct({{0, 1}, {201, 401}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridLocalMaxima)->ArgsProduct({{0, 1}, {201, 401}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnalyzeWorld)->ArgsProduct({{0, 1}, {0}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GpPredict)->ArgsProduct({{0, 1}, {2048, 8192}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
