#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "chid/basis.hpp"
#include "chid/forward.hpp"
#include "chid/parameter_function.hpp"

namespace chid {

enum class Provenance { interpolation_only, interpolation_with_noise };

const char* to_string(Provenance p);

/// Measured size of an injected perturbation eta.
struct NoiseMeasures {
  double h3_max = 0.0;      ///< max_k ||eta_k||_{H3}
  double h1_max = 0.0;      ///< max_k ||eta_k||_{H1}
  double dt_hm1_max = 0.0;  ///< max_k ||d_tau eta_k||_{H^-1}
  double dt_hm1_l2 = 0.0;   ///< (sum_k tau ||d_tau eta_k||_{H^-1}^2)^{1/2}
};

/// Phase-field observations: periodic cubic splines in space on the data mesh,
/// piecewise linear in time with step tau.
struct ObservationData {
  explicit ObservationData(SpatialBasis b) : basis(std::move(b)) {}

  SpatialBasis basis;
  double tau = 0.0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> phi;

  /// Noise level delta: the injected level for synthetic noise, otherwise
  /// the a-posteriori interpolation estimate.
  double noise_level = 0.0;
  /// max_k ||phi_h - phi_delta||_{H1} recorded at restriction time.
  double interpolation_discrepancy = 0.0;
  Provenance provenance = Provenance::interpolation_only;
  NoiseMeasures noise;

  std::size_t size() const { return times.size(); }
  PeriodicField field(std::size_t k) const { return {basis, phi[k]}; }
  /// Backward difference (phi_k - phi_{k-1}) / tau as a spline field.
  PeriodicField time_derivative_field(std::size_t k) const;
  /// Index of a data instant; throws ValidationError if t is not one.
  std::size_t index_of(double t) const;
  /// Indices k >= 1 with t0 <= times[k] <= t1 (within rounding).
  std::vector<std::size_t> window(double t0, double t1) const;
  /// FNV-1a hash of the coefficient arrays, times and tau.
  std::uint64_t fingerprint() const;
};

/// Samples every `factor`-th state on the mesh coarsened by `factor` and
/// interpolates with periodic cubic splines. Throws ValidationError if the
/// cell or step count is not divisible.
ObservationData restrict_to_data_grid(const Trajectory& traj,
                                      std::size_t factor = 2);

/// L2 projection of phi'' onto the basis of phi, from the weak form
/// (w, psi) = -(phi', psi'). Its derivative is the third-derivative estimate
/// used by the equation-error operators and the co-area coefficients.
PeriodicField projected_laplacian(const PeriodicField& phi);

/// Chemical potential -gamma phi'' + f(phi) as the L2 projection onto the
/// data spline space of its weak form, with f = F' taken from `potential`.
PeriodicField chemical_potential_from_data(const ObservationData& data,
                                           std::size_t k, double gamma,
                                           const ParameterFunction& potential);

/// Vector (d_tau phi_k, psi_i)_{L2}. Throws ValidationError for k = 0.
Eigen::VectorXd time_derivative(const ObservationData& data, std::size_t k);

/// Adds a smooth band-limited periodic perturbation whose H3 norm equals
/// delta at every instant; the perturbation rotates between two fixed random
/// profiles over the data window. Deterministic in `seed`. delta = 0 returns
/// the data unchanged. Throws ValidationError if values leave (-1, 1).
ObservationData inject_noise(const ObservationData& data, double delta,
                             std::uint64_t seed);

/// Measures an arbitrary perturbation between two datasets on the same grid.
NoiseMeasures measure_perturbation(const ObservationData& reference,
                                   const ObservationData& perturbed);

}  // namespace chid
