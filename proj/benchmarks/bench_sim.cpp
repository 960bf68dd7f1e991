#include <benchmark/benchmark.h>

#include "mfboost/controller.hpp"
#include "mfboost/plant.hpp"
#include "mfboost/scenario_io.hpp"
#include "mfboost/sim.hpp"

using namespace mfboost;

static void BM_IpiStep(benchmark::State& state) {
    const IpiConfig cfg;
    ControllerState s = ipi_init(cfg, 12.0, 24.0, cfg.u_min);
    double y = 12.0;
    for (auto _ : state) {
        const auto step = ipi_step(s, cfg, y, 24.0);
        s = step.state;
        y += 1e-3 * (step.duty - 0.5);
        benchmark::DoNotOptimize(step.duty);
    }
}
BENCHMARK(BM_IpiStep);

static void BM_AveragedDynamics(benchmark::State& state) {
    const BoostParams p;
    PlantState x{0.96, 24.0};
    for (auto _ : state) {
        const auto d = averaged_dynamics(x, 0.5, p);
        benchmark::DoNotOptimize(d.rate);
        x.inductor_current += 1e-12;
    }
}
BENCHMARK(BM_AveragedDynamics);

static void BM_SwitchedStep(benchmark::State& state) {
    const BoostParams p;
    const int substeps = static_cast<int>(state.range(0));
    PlantState x{0.0, 12.0};
    for (auto _ : state) {
        x = switched_step(x, p, 0.5, substeps);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_SwitchedStep)->Arg(10)->Arg(100);

static void BM_Preset(benchmark::State& state) {
    const Scenario s = preset(preset_names[state.range(0)]);
    for (auto _ : state) {
        auto records = run_closed_loop(s);
        benchmark::DoNotOptimize(records.data());
    }
    state.SetLabel(std::string(preset_names[state.range(0)]));
}
BENCHMARK(BM_Preset)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
