// Serial reference against the OpenMP kernels on the same ensembles.

#include <benchmark/benchmark.h>

#include "walsh/ensemble.hpp"

using namespace walsh;

namespace {

SimConfig ensemble(std::size_t paths, double horizon, double dt) {
  SimConfig c;
  c.horizon = horizon;
  c.dt = dt;
  c.seed = 1;
  c.path_count = paths;
  return c;
}

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel x" + std::to_string(thread_count()));
}

void terminal(benchmark::State& state) {
  const CoefficientField field({{RadialCoefficient::constant(-1.0), RadialCoefficient::constant(1.0)},
                                {RadialCoefficient::constant(-2.0), RadialCoefficient::constant(1.0)}});
  const SpinningMeasure mu = SpinningMeasure::planar(std::vector<double>{0.5, 0.5});
  const SimConfig cfg = ensemble(2000, 2.0, 1e-3);
  for (auto _ : state)
    benchmark::DoNotOptimize(terminal_states(field, mu, TreePoint::on_ray(0, 2.0), cfg, {1.0, 2.0}, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.path_count));
  label(state);
}

void local_time(benchmark::State& state) {
  const SpinningMeasure mu = SpinningMeasure::planar(std::vector<double>{0.3, 0.7});
  const SimConfig cfg = ensemble(100, 5.0, 1e-4);
  const std::vector<std::vector<bool>> subsets{{true, false}};
  for (auto _ : state) benchmark::DoNotOptimize(walsh_bm_local_times(mu, subsets, cfg, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.path_count));
  label(state);
}

void excursions(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(high_excursion_counts(2.0, 0.5, 1e-3, 5, 2000, mode(state)));
  state.SetItemsProcessed(state.iterations() * 2000);
  label(state);
}

void coupling(benchmark::State& state) {
  const CoefficientField field = CoefficientField::uniform(1, RadialCoefficient::constant(-1.0),
                                                           RadialCoefficient::constant(1.0));
  const SpinningMeasure mu = SpinningMeasure::planar(std::vector<double>{1.0});
  const SimConfig cfg = ensemble(2000, 4.0, 1e-3);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        coupling_times(field, mu, TreePoint::on_ray(0, 1.0), TreePoint::on_ray(0, 3.0), cfg, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.path_count));
  label(state);
}

}  // namespace

BENCHMARK(terminal)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(local_time)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(excursions)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(coupling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
