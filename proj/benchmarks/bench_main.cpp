#include <benchmark/benchmark.h>

#include "mlsep/dynamics.hpp"
#include "mlsep/flux.hpp"
#include "mlsep/measures.hpp"

using namespace mlsep;

namespace {

const TwoLaneRates kKernel{1.0, 0.5, 0.7, 0.3, 2.0, 1.0};

void BM_EventLoop(benchmark::State& state) {
    const auto g = LaneGeometry::ring(static_cast<int>(state.range(0)), 2);
    const Config init = sample(BernoulliTotal{1.0, kKernel.p, kKernel.q}, g, 7);
    SimState sim(init, enumerate_bonds(kKernel, g), 11);
    for (auto _ : state) benchmark::DoNotOptimize(sim.step());
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EventLoop)->Arg(64)->Arg(256)->Arg(1024);

void BM_CoupledEventLoop(benchmark::State& state) {
    const auto g = LaneGeometry::ring(256, 2);
    const Config eta = sample(BernoulliTotal{0.8, kKernel.p, kKernel.q}, g, 7);
    const Config xi = sample(BernoulliTotal{1.2, kKernel.p, kKernel.q}, g, 8);
    // run_coupled in slices to amortize the setup
    double T = 0;
    for (auto _ : state) {
        state.PauseTiming();
        CoupledRunOptions co;
        co.T = 5;
        state.ResumeTiming();
        const auto traj = run_coupled({eta, xi}, RateKernel(kKernel), co, 13);
        benchmark::DoNotOptimize(traj.accepted_events);
        T += 5;
    }
    benchmark::DoNotOptimize(T);
}
BENCHMARK(BM_CoupledEventLoop);

void BM_FluxEvaluation(benchmark::State& state) {
    const FluxCurve curve(1.0, 0.4, 0.37);
    double rho = 0.0;
    for (auto _ : state) {
        rho += 1e-4;
        if (rho > 2) rho = 0;
        benchmark::DoNotOptimize(curve.G(rho));
    }
}
BENCHMARK(BM_FluxEvaluation);

void BM_ClassifyR0(benchmark::State& state) {
    for (auto _ : state) {
        const auto res = classify_R0(FluxCurve::reduced(0.6, 0.4));
        benchmark::DoNotOptimize(res.pairs.size());
    }
}
BENCHMARK(BM_ClassifyR0);

void BM_ConditionedSampler(benchmark::State& state) {
    const auto win = LaneGeometry::closed(static_cast<int>(state.range(0)), 2);
    const ConditionedBlocking spec{BlockingParity::Even, 0, 1, 2, 2};
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample(spec, win, ++seed));
    }
}
BENCHMARK(BM_ConditionedSampler)->Arg(20)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
