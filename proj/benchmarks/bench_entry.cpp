#include <memory>

#include <benchmark/benchmark.h>

#include "entry/config.hpp"

namespace {

using namespace entry;

const Scenario& scenario() {
  static const Scenario s = pinned_scenario();
  return s;
}

std::shared_ptr<const ReferenceTrajectory> reference() {
  static const auto ref = std::make_shared<const ReferenceTrajectory>(build_reference(scenario()));
  return ref;
}

void BM_EomTimeDomain(benchmark::State& state) {
  const PlantModel plant = nominal_plant(scenario());
  const LongitudinalState x{plant.env.to_radius(55000.0), 0.75, -0.002};
  for (auto _ : state) benchmark::DoNotOptimize(eom_time_domain(x, {40.0, 0.7}, plant));
}
BENCHMARK(BM_EomTimeDomain);

void BM_Rk4Step(benchmark::State& state) {
  const PlantModel plant = nominal_plant(scenario());
  const LongitudinalState x{plant.env.to_radius(55000.0), 0.75, -0.002};
  const double h = 0.05 / plant.env.time_scale();
  for (auto _ : state) benchmark::DoNotOptimize(rk4_step(x, {40.0, 0.7}, plant, h));
}
BENCHMARK(BM_Rk4Step);

void BM_ReferenceLookup(benchmark::State& state) {
  const auto ref = reference();
  const double vs = scenario().env.velocity_scale();
  double v = 7000.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ref->lookup(v / vs));
    v = v > 1600.0 ? v - 0.37 : 7000.0;
  }
}
BENCHMARK(BM_ReferenceLookup);

void BM_LinearizeAndClassify(benchmark::State& state) {
  const auto p = reference()->lookup(5500.0 / scenario().env.velocity_scale());
  for (auto _ : state) {
    benchmark::DoNotOptimize(nu_model(linearize(p)));
    benchmark::DoNotOptimize(analyze_zero_dynamics(p, scenario().env));
  }
}
BENCHMARK(BM_LinearizeAndClassify);

void BM_ObserverStep(benchmark::State& state) {
  const auto m = nu_model(linearize(reference()->lookup(5500.0 / scenario().env.velocity_scale())));
  const auto g = observer_gains(m, scenario().guidance.gains);
  ObserverState s;
  ObserverInputs in;
  for (auto _ : state) benchmark::DoNotOptimize(s = observer_step(s, in, m, g, 1e-5));
}
BENCHMARK(BM_ObserverStep);

void BM_NominalRun(benchmark::State& state) {
  Scenario s = scenario();
  s.guidance.controller = state.range(0) == 0 ? ControllerKind::Proposed : ControllerKind::Shuttle;
  const auto ref = reference();
  for (auto _ : state) benchmark::DoNotOptimize(run_single(s, ref, DispersionDraw{}).metrics);
}
BENCHMARK(BM_NominalRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

// The distro libbenchmark_main.a carries LTO bytecode from another compiler version, so define main here.
BENCHMARK_MAIN();
