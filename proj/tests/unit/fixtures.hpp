#pragma once

#include <cmath>
#include <numbers>

#include "chid/forward.hpp"
#include "chid/model.hpp"
#include "chid/observation.hpp"

namespace chid::testing {

inline constexpr double kPi = std::numbers::pi;

inline double sine(double x) { return std::sin(2.0 * kPi * x); }

// Short paper-parameter run on a coarse mesh; cached per (n, T).
inline const Trajectory& short_paper_run(std::size_t n_cells = 40, double T = 8e-4) {
  struct Entry {
    std::size_t n;
    double T;
    Trajectory traj;
  };
  static std::vector<std::unique_ptr<Entry>> cache;
  for (const auto& e : cache) {
    if (e->n == n_cells && e->T == T) return e->traj;
  }
  const ModelParams params = ModelParams::paper();
  const ForwardSolver solver(PeriodicMesh(n_cells), params);
  auto traj = solver.simulate(interpolate(solver.basis(), paper_initial_phase), T, 2e-5);
  cache.push_back(std::make_unique<Entry>(Entry{n_cells, T, std::move(traj)}));
  return cache.back()->traj;
}

inline const ObservationData& short_paper_data(std::size_t n_cells = 40, double T = 8e-4) {
  struct Entry {
    std::size_t n;
    double T;
    ObservationData data;
  };
  static std::vector<std::unique_ptr<Entry>> cache;
  for (const auto& e : cache) {
    if (e->n == n_cells && e->T == T) return e->data;
  }
  cache.push_back(std::make_unique<Entry>(
      Entry{n_cells, T, restrict_to_data_grid(short_paper_run(n_cells, T), 2)}));
  return cache.back()->data;
}

// Spline data set with one field per instant, given as phi(x, t).
template <class Fn>
ObservationData synthetic_data(std::size_t n_cells, double tau, std::size_t instants,
                               Fn&& phi) {
  ObservationData data{SpatialBasis(BasisKind::periodic_cubic_spline, PeriodicMesh(n_cells))};
  data.tau = tau;
  for (std::size_t k = 0; k < instants; ++k) {
    const double t = static_cast<double>(k) * tau;
    data.times.push_back(t);
    data.phi.push_back(interpolate(data.basis, [&](double x) { return phi(x, t); }).coeffs);
  }
  return data;
}

}  // namespace chid::testing
