#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "chid/interval_set.hpp"
#include "chid/observation.hpp"

namespace chid {

/// Range {phi(x) : x in [0,1)} of a periodic field: exact per-piece extrema
/// combined with dense sampling (at least 10^4 points).
IntervalSet attained_range(const PeriodicField& phi);
IntervalSet attained_range(const ObservationData& data, std::size_t k);
/// Union over several instants.
IntervalSet attained_range(const ObservationData& data,
                           std::span<const std::size_t> ks);

/// Default observability threshold: 1e-3 * max |mu'|.
inline constexpr double kRelativeObservabilityThreshold = 1e-3;

/// Values of phi attained where |mu'| exceeds `threshold`, evaluated on the
/// same dense sample. Without a threshold the relative default is used.
IntervalSet observable_range(const PeriodicField& phi, const PeriodicField& mu,
                             std::optional<double> threshold = std::nullopt);
IntervalSet observable_range(const ObservationData& data, double gamma,
                             const ParameterFunction& potential, std::size_t k,
                             std::optional<double> threshold = std::nullopt);
IntervalSet observable_range(const ObservationData& data, double gamma,
                             const ParameterFunction& potential,
                             std::span<const std::size_t> ks,
                             std::optional<double> threshold = std::nullopt);

/// A level-set crossing phi(x) = s.
struct Crossing {
  double x;
  std::size_t cell;
  double u;
  int direction;  ///< +1 where phi increases through s, -1 otherwise
};

/// All crossings of the level s, found per spline piece on monotone brackets.
std::vector<Crossing> level_crossings(const PeriodicField& phi, double s);

/// Co-area coefficients in one space dimension:
///   A_b = -gamma sum_c w'(x_c) sign(phi'(x_c)),  w = projected_laplacian(phi)
///   A_c = sum_c |phi'(x_c)|
///   A   = -int dphi/dt H(phi - s) dx
/// With these, b(s) A_b + c(s) A_c = A for c = b f'.
struct CoareaCoefficients {
  double A_b = 0.0;
  double A_c = 0.0;
  double A = 0.0;
  std::size_t crossings = 0;
  /// Some crossing has |phi'| below the degeneracy tolerance.
  bool degenerate = false;
};

/// `relative_degeneracy` scales max |phi'| to give the degeneracy bound.
CoareaCoefficients coarea_coefficients(const PeriodicField& phi,
                                       const PeriodicField& dphi_dt,
                                       double gamma, double s,
                                       double relative_degeneracy = 1e-3);
CoareaCoefficients coarea_coefficients(const ObservationData& data,
                                       double gamma, double s, std::size_t k);

/// |A_b b + A_c c - A| / max(|A|, A_c)
double coarea_identity_residual(const CoareaCoefficients& coeffs, double b,
                                double c);

struct IndependenceResult {
  Eigen::Matrix2d system;  ///< rows (A_b(s,t_i), A_c(s,t_i))
  double condition = 0.0;  ///< 2-norm condition number, inf if singular
  bool independent = false;
};

inline constexpr double kDefaultConditionCap = 1e6;

IndependenceResult independence_from_rows(const Eigen::Matrix2d& rows,
                                          double cap = kDefaultConditionCap);

/// Checks the 2x2 co-area system at (s, t1), (s, t2). Throws ValidationError
/// if either level set is degenerate.
IndependenceResult independence_check(const ObservationData& data, double gamma,
                                      double s, std::size_t k1, std::size_t k2,
                                      double cap = kDefaultConditionCap);

}  // namespace chid
