#include <benchmark/benchmark.h>

#include "tdem/composite.hpp"
#include "tdem/early_time.hpp"
#include "tdem/inversion.hpp"
#include "tdem/modes.hpp"

using namespace tdem;

namespace {

TargetSpec aluminum() { return {0.05, MaterialSpec::from_resistivity(2.8e-8, 1.0)}; }

void BM_FindDecayRates(benchmark::State& state) {
  const int count = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(find_decay_rates(aluminum(), 1.0, 1, count));
  state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_FindDecayRates)->Arg(50)->Arg(500)->Arg(2000);

void BM_Synthesize(benchmark::State& state) {
  const ModeLibrary lib = build_mode_library(aluminum(), 1.0, 1, static_cast<int>(state.range(0)));
  const Loop loop = Loop::circular(0.3, 0.4);
  const auto coeffs = compute_excitation(lib, PulseWaveform::step_off(1.0), loop, loop);
  const auto gates = log_gates(1e-6, 1.0, 200);
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_voltage(lib, coeffs, gates));
}
BENCHMARK(BM_Synthesize)->Arg(100)->Arg(500);

void BM_EarlyTimePipeline(benchmark::State& state) {
  EarlyTimeContext ctx;
  ctx.target = aluminum();
  ctx.markers = characteristic_times(ctx.target, {}, 0.0);
  const Loop tx = Loop::polygon({Vec3(-0.2, -0.2, 0.3), Vec3(0.2, -0.2, 0.3), Vec3(0.2, 0.2, 0.3), Vec3(-0.2, 0.2, 0.3)});
  const int max_l = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto sol = solve_early_time(ctx, illumination_coefficients(tx, 1.0, ctx.target, max_l));
    benchmark::DoNotOptimize(early_voltage_amplitude(ctx, sol.dphi_at(1e-5), tx));
  }
}
BENCHMARK(BM_EarlyTimePipeline)->Arg(3)->Arg(8);

void BM_FitTwoExponentials(benchmark::State& state) {
  DecayModel truth;
  truth.terms = {{0.3, 1.0}, {3.0, 10.0}};
  TimeSeries ts;
  ts.t = log_gates(1e-2, 5.0, 60);
  for (double t : ts.t) ts.value.push_back(truth.evaluate(t));
  const TimeSeries noisy = add_relative_noise(ts, 0.01, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_exponentials(noisy, 2));
}
BENCHMARK(BM_FitTwoExponentials);

}  // namespace

BENCHMARK_MAIN();
