#include <benchmark/benchmark.h>

#include <string>

#include "commands.hpp"
#include "pollingkit/analysis.hpp"
#include "pollingkit/branching.hpp"
#include "pollingkit/simulator.hpp"
#include "pollingkit/transforms.hpp"

using namespace pollingkit;

namespace {

const char* discipline_file(int index) {
  static const char* const files[] = {"threshold_gated.json", "threshold_globally-gated.json",
                                      "threshold_exhaustive.json"};
  return files[index];
}

cli::Scenario scenario(int index) {
  return cli::load_scenario(std::string(POLLINGKIT_SCENARIO_DIR) + "/" + discipline_file(index));
}

void BM_BusyPeriod(benchmark::State& state) {
  const Lst service = Distribution::exponential(1.0).transform();
  double w = 0.0;
  for (auto _ : state) {
    w = w < 10.0 ? w + 0.01 : 0.0;
    benchmark::DoNotOptimize(busy_period_complement(service, 0.6, w));
  }
}
BENCHMARK(BM_BusyPeriod);

void BM_P1Product(benchmark::State& state) {
  const ModelTransforms mt(scenario(static_cast<int>(state.range(0))).model());
  double y = 0.0;
  for (auto _ : state) {
    y = y < 0.99 ? y + 0.01 : 0.0;
    benchmark::DoNotOptimize(mt.p1_complement(y, 1.0 - y));
  }
}
BENCHMARK(BM_P1Product)->DenseRange(0, 2);

void BM_Report(benchmark::State& state) {
  const auto model = scenario(static_cast<int>(state.range(0))).model();
  for (auto _ : state) benchmark::DoNotOptimize(report(ModelTransforms(model)));
}
BENCHMARK(BM_Report)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_SweepRow(benchmark::State& state) {
  const auto s = scenario(static_cast<int>(state.range(0)));
  const cli::ThresholdGrid one_point{1.0, 1.0, 0.01};
  for (auto _ : state) benchmark::DoNotOptimize(cli::sweep(s, one_point));
}
BENCHMARK(BM_SweepRow)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_FullSweep(benchmark::State& state) {
  const auto s = scenario(static_cast<int>(state.range(0)));
  const auto grid = s.sweep.value_or(cli::ThresholdGrid{0.1, 5.0, 0.01});
  for (auto _ : state) benchmark::DoNotOptimize(cli::sweep(s, grid));
}
BENCHMARK(BM_FullSweep)->DenseRange(0, 2)->Unit(benchmark::kSecond)->Iterations(1);

void BM_Simulation(benchmark::State& state) {
  SimConfig cfg{scenario(static_cast<int>(state.range(0))).model()};
  cfg.warmup_customers = 10'000;
  cfg.measured_customers = 100'000;
  cfg.replications = 2;
  for (auto _ : state) benchmark::DoNotOptimize(run(cfg));
}
BENCHMARK(BM_Simulation)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
