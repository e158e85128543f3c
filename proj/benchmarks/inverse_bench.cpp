#include <benchmark/benchmark.h>

#include "chid/forward.hpp"
#include "chid/observation.hpp"
#include "chid/postprocess.hpp"
#include "chid/problem.hpp"
#include "chid/tikhonov.hpp"

namespace {

using namespace chid;

// Paper-parameter data on [0, 0.002] from a coarse run; built once.
const ObservationData& bench_data() {
  static const ObservationData data = [] {
    const ForwardSolver solver(PeriodicMesh(100), ModelParams::paper());
    const auto traj =
        solver.simulate(interpolate(solver.basis(), paper_initial_phase), 2e-3, 2e-5);
    return restrict_to_data_grid(traj, 2);
  }();
  return data;
}

ProblemKind kind_of(const benchmark::State& state) {
  return static_cast<ProblemKind>(state.range(0));
}

void BM_Assemble(benchmark::State& state) {
  const auto& data = bench_data();
  const auto idx = data.window(0.0, 2e-3);
  AssemblyOptions opts;
  opts.threads = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_problem(kind_of(state), data, ModelParams::paper(), idx, opts));
  }
  state.SetLabel(to_string(kind_of(state)));
}
BENCHMARK(BM_Assemble)
    ->ArgsProduct({{0, 1, 2}, {1, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_TikhonovCg(benchmark::State& state) {
  const auto& data = bench_data();
  const auto problem =
      assemble_problem(kind_of(state), data, ModelParams::paper(), data.window(0.0, 2e-3));
  const NormalEquations normal = normal_equations(problem);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tikhonov_solve(problem, normal, 1e-8));
  }
  state.SetLabel(to_string(kind_of(state)));
}
BENCHMARK(BM_TikhonovCg)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

void BM_TikhonovDirect(benchmark::State& state) {
  const auto& data = bench_data();
  const auto problem =
      assemble_problem(kind_of(state), data, ModelParams::paper(), data.window(0.0, 2e-3));
  for (auto _ : state) {
    benchmark::DoNotOptimize(tikhonov_solve_direct(problem, 1e-8));
  }
  state.SetLabel(to_string(kind_of(state)));
}
BENCHMARK(BM_TikhonovDirect)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_LCurve(benchmark::State& state) {
  const auto& data = bench_data();
  const auto problem = assemble_problem(ProblemKind::identify_joint, data, ModelParams::paper(),
                                        data.window(0.0, 2e-3));
  const auto grid = default_alpha_grid();
  for (auto _ : state) {
    benchmark::DoNotOptimize(lcurve_select(problem, grid, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_LCurve)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
