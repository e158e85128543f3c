#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chid/interval_set.hpp"
#include "chid/model.hpp"
#include "chid/problem.hpp"
#include "chid/tikhonov.hpp"

namespace chid {

/// Spline with the solution coefficients as knot values.
ParameterFunction solution_function(const KnotGrid& grid,
                                    const Eigen::VectorXd& coefficients);

/// f' = c / b at the knots of c, refitted on the same knots. Throws
/// ValidationError if b falls below `floor` at any knot.
ParameterFunction recover_fprime(const ParameterFunction& c,
                                 const ParameterFunction& b,
                                 double floor = 1e-8);

/// ||rec - truth||_{L2(range)} / ||truth||_{L2(range)} by composite Gauss
/// quadrature. The absolute error is returned where the truth vanishes on the
/// range. Throws ValidationError for a range of zero measure.
double range_restricted_error(const std::function<double(double)>& reconstruction,
                              const std::function<double(double)>& truth,
                              const IntervalSet& range);

/// Knot values of the true unknown: c = b F'' (identify-f), b (identify-b),
/// or (b, c) stacked (joint).
Eigen::VectorXd truth_coefficients(ProblemKind kind, const ModelParams& params,
                                   const KnotGrid& grid);

/// Assembles one problem kind from data with the known function taken from
/// `params` (mobility for identify-f, potential for identify-b).
AssembledProblem assemble_problem(ProblemKind kind, const ObservationData& data,
                                  const ModelParams& params,
                                  std::span<const std::size_t> indices,
                                  const AssemblyOptions& options = {});

struct PerturbationProbe {
  std::vector<double> deltas;
  std::vector<double> operator_perturbation;  ///< ||(T^delta - T) x||
  std::vector<double> data_perturbation;      ///< ||y^delta - y||
  double slope = 0.0;  ///< least-squares log-log slope of operator_perturbation
};

/// Injects noise of each level into `exact`, reassembles and measures the
/// change of the operator applied to x and of the right-hand side in the
/// stacked M^{-1}-weighted norm.
PerturbationProbe perturbation_scaling_probe(
    ProblemKind kind, const ObservationData& exact, const ModelParams& params,
    std::span<const std::size_t> indices, std::span<const double> deltas,
    const Eigen::VectorXd& x, std::uint64_t seed,
    const AssemblyOptions& options = {});

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace chid
