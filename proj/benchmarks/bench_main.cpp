#include <benchmark/benchmark.h>

#include "haptic/control/controller.hpp"
#include "haptic/learner/dataset.hpp"
#include "haptic/learner/ensemble.hpp"
#include "haptic/plant/plant.hpp"
#include "haptic/psychophysics/fit.hpp"
#include "haptic/psychophysics/schedule.hpp"
#include "haptic/session/task.hpp"
#include "haptic/session/teacher.hpp"

using namespace haptic;

namespace {

std::vector<psychophysics::DataPoint> subject(std::uint64_t seed) {
  const auto tests = psychophysics::standard_test_pressures();
  const auto schedule = psychophysics::build_schedule(Pressure::psi(2.0), tests, 10, 0, Seed{seed});
  Rng rng = Rng(Seed{seed}).split(streams::responses);
  return psychophysics::tally(psychophysics::simulate_responses(schedule, 4.678, rng));
}

learner::TrainingSet cleaning_set(std::uint64_t seed) {
  const auto task = session::cleaning_task();
  Rng rng = Rng(Seed{seed}).split(streams::demos);
  return learner::make_training_set(session::expert_demonstrations(task, 5, rng), {1}, task);
}

}  // namespace

static void BM_FitSigmoid(benchmark::State& state) {
  const auto pts = subject(1);
  for (auto _ : state) benchmark::DoNotOptimize(psychophysics::fit_sigmoid(pts, Pressure::psi(2.0)).k);
}
BENCHMARK(BM_FitSigmoid);

static void BM_PlantStep(benchmark::State& state) {
  const auto params = plant::PlantParams::defaults();
  plant::PlantState s;
  s.regulator_setpoint = Pressure::psi(3.0);
  bool fill = true;
  for (auto _ : state) {
    s = plant::step(s, {fill, !fill}, 0.01, params);
    if (s.pressure.psi() > 2.9 || s.pressure.psi() < 0.1) fill = !fill;
    benchmark::DoNotOptimize(s.pressure);
  }
}
BENCHMARK(BM_PlantStep);

static void BM_ControlTick(benchmark::State& state) {
  plant::PlantState s;
  s.regulator_setpoint = Pressure::psi(3.0);
  plant::Plant plant(plant::PlantParams::defaults(), s, Rng(Seed{1}));
  const control::ControllerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(control::control_tick(plant, Pressure::psi(2.0), cfg));
}
BENCHMARK(BM_ControlTick);

static void BM_UncertaintyQuery(benchmark::State& state) {
  learner::EnsembleConfig cfg;
  cfg.epochs = 50;
  const auto e = learner::train(cleaning_set(1), cfg, Seed{1});
  const auto task = session::cleaning_task();
  int i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(e.uncertainty(task.pose_at(i / 1000.0)));
    i = (i + 1) % 1001;
  }
}
BENCHMARK(BM_UncertaintyQuery);

static void BM_TrainEnsemble(benchmark::State& state) {
  const auto set = cleaning_set(2);
  learner::EnsembleConfig cfg;
  cfg.epochs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(learner::train(set, cfg, Seed{2}).u_cal());
  state.SetLabel(std::to_string(set.size()) + " samples");
}
BENCHMARK(BM_TrainEnsemble)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
