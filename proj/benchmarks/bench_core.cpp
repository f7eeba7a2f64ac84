#include <benchmark/benchmark.h>

#include <filesystem>

#include "delaysafe/plant.hpp"
#include "delaysafe/safety.hpp"
#include "delaysafe/scenario.hpp"
#include "delaysafe/smith.hpp"
#include "delaysafe/tracking.hpp"

using namespace delaysafe;

namespace {

void BM_WheelStep(benchmark::State& state) {
  WheelState wheel(discretize_plant(kIdentifiedWheel, 0.001));
  double u = 0.3;
  for (auto _ : state) {
    u = -u;
    benchmark::DoNotOptimize(wheel.step(u));
  }
}
BENCHMARK(BM_WheelStep);

void BM_ServoLoopStep(benchmark::State& state) {
  const DiscretePlant p = discretize_plant(kIdentifiedWheel, 0.001);
  ServoLoop loop({PiController{2.0, 1.0}, 1.0, true}, p);
  WheelState wheel(p);
  double v = 0.0;
  for (auto _ : state) {
    v = wheel.step(loop.step(0.3, v));
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_ServoLoopStep);

void BM_VfoStep(benchmark::State& state) {
  double t = 0.0;
  double theta_a = 0.0;
  for (auto _ : state) {
    const ReferenceState r = reference_figure8(t, 0.5, 1.5, 0.2);
    const VfoOutput out = vfo_step({0.1, -1.4, 0.2}, r, 2.4, theta_a, 0.2);
    theta_a = out.theta_a;
    t += 0.001;
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_VfoStep);

void BM_BarrierDerivatives(benchmark::State& state) {
  const BarrierField f{0.6, 1.0,
                       {ObstacleSpec::circular(0.85, 0.85, 0.4),
                        ObstacleSpec::circular(-1.25, 0.0, 0.3),
                        ObstacleSpec::superellipse(0.0, 1.2, 1.0, 1.0, 2)}};
  double x = 0.1;
  for (auto _ : state) {
    x += 1e-6;
    benchmark::DoNotOptimize(barrier_gradient(f, x, 0.3));
    benchmark::DoNotOptimize(barrier_hessian(f, x, 0.3));
  }
}
BENCHMARK(BM_BarrierDerivatives);

void BM_ContourFigure8(benchmark::State& state) {
  TrajectorySpec f8;
  f8.kind = TrajectoryKind::kFigure8;
  f8.omega = 0.2;
  double x = 0.0;
  for (auto _ : state) {
    x += 1e-4;
    benchmark::DoNotOptimize(contour_error({x, -1.3, 0.0}, f8));
  }
}
BENCHMARK(BM_ContourFigure8);

void BM_RunScenario(benchmark::State& state) {
  const auto path = std::filesystem::path(DELAYSAFE_SCENARIO_DIR) / "two_circular_obstacles.json";
  ScenarioConfig cfg = load_config(path);
  cfg.duration = 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.step_count()));
}
BENCHMARK(BM_RunScenario)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
