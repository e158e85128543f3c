#include <benchmark/benchmark.h>

#include "chid/forward.hpp"
#include "chid/gram.hpp"
#include "chid/model.hpp"
#include "chid/observation.hpp"

namespace {

using namespace chid;

void BM_ForwardStep(benchmark::State& state) {
  const ForwardSolver solver(PeriodicMesh(static_cast<std::size_t>(state.range(0))),
                             ModelParams::paper());
  const PeriodicField phi0 = interpolate(solver.basis(), paper_initial_phase);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.step(phi0, 2e-5));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ForwardStep)->RangeMultiplier(2)->Range(50, 800)->Complexity();

void BM_Simulate100Steps(benchmark::State& state) {
  const ForwardSolver solver(PeriodicMesh(200), ModelParams::paper());
  const PeriodicField phi0 = interpolate(solver.basis(), paper_initial_phase);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.simulate(phi0, 2e-3, 2e-5));
  }
}
BENCHMARK(BM_Simulate100Steps)->Unit(benchmark::kMillisecond);

void BM_DualNorm(benchmark::State& state) {
  const SpatialBasis basis(BasisKind::quadratic_fe,
                           PeriodicMesh(static_cast<std::size_t>(state.range(0))));
  const GramPair grams = assemble_grams(basis);
  const Eigen::VectorXd y = load_vector(basis, paper_initial_phase, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dual_norm_hm1(y, grams));
  }
}
BENCHMARK(BM_DualNorm)->RangeMultiplier(4)->Range(100, 1600);

void BM_ProjectedLaplacian(benchmark::State& state) {
  const SpatialBasis basis(BasisKind::periodic_cubic_spline,
                           PeriodicMesh(static_cast<std::size_t>(state.range(0))));
  const PeriodicField phi = interpolate(basis, paper_initial_phase);
  for (auto _ : state) {
    benchmark::DoNotOptimize(projected_laplacian(phi));
  }
}
BENCHMARK(BM_ProjectedLaplacian)->RangeMultiplier(4)->Range(100, 1600);

}  // namespace
