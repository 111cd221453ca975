#include <benchmark/benchmark.h>

#include "spinfid/dynamics.hpp"
#include "spinfid/fit.hpp"

namespace {

using namespace spinfid;

dynamics::ExperimentConfig bench_config(std::size_t members) {
  dynamics::ExperimentConfig c;
  c.field = physics::MagneticField(5.0);
  c.ensemble_size = members;
  c.noise.additive_sigma = 1.0 / 300.0;
  return c;
}

void BM_SimulateTrace(benchmark::State& state) {
  const auto c = bench_config(static_cast<std::size_t>(state.range(0)));
  dynamics::SimulationOptions opt;
  opt.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(dynamics::simulate_trace(c, opt));
  state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(c.time_grid.size()));
}
BENCHMARK(BM_SimulateTrace)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ExtractT2star(benchmark::State& state) {
  const auto trace = dynamics::simulate_trace(bench_config(2000));
  const std::optional<double> field = state.range(0) ? std::optional<double>(5.0) : std::nullopt;
  for (auto _ : state) benchmark::DoNotOptimize(fit::extract_t2star(trace, field));
}
BENCHMARK(BM_ExtractT2star)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_InitialGuess(benchmark::State& state) {
  const auto trace = dynamics::simulate_trace(bench_config(2000));
  for (auto _ : state) benchmark::DoNotOptimize(fit::initial_guess_damped_cosine(trace));
}
BENCHMARK(BM_InitialGuess)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
