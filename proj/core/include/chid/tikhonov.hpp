#pragma once

#include <Eigen/Core>
#include <vector>

#include "chid/problem.hpp"

namespace chid {

/// Normal equations N = sum_k T_k^T M^{-1} T_k, r = sum_k T_k^T M^{-1} y_k.
struct NormalEquations {
  Eigen::MatrixXd N;
  Eigen::VectorXd rhs;
  Eigen::MatrixXd R;
};

NormalEquations normal_equations(const AssembledProblem& problem);

struct RegularizedSolution {
  Eigen::VectorXd coefficients;
  double alpha = 0.0;
  double residual_norm = 0.0;  ///< M^{-1}-weighted, recomputed from T and y
  double solution_norm = 0.0;  ///< sqrt(x^T R x)
  std::size_t cg_iterations = 0;
  /// R^{-1}-weighted normal-equation residual relative to the rhs.
  double normal_residual = 0.0;
};

struct CgOptions {
  double tolerance = 1e-16;
  std::size_t max_iterations = 0;  ///< 0: 50 times the unknown count
};

/// Minimizes ||T x - y||^2 + alpha x^T R x by R-preconditioned CG on the
/// normal equations. Throws ValidationError for alpha <= 0 and
/// NumericalError if CG stagnates.
RegularizedSolution tikhonov_solve(const AssembledProblem& problem,
                                   double alpha, const CgOptions& cg = {});
RegularizedSolution tikhonov_solve(const AssembledProblem& problem,
                                   const NormalEquations& normal, double alpha,
                                   const CgOptions& cg = {});

/// Same minimizer via a QR factorization of the whitened stacked system
/// [L^{-1} T; sqrt(alpha) G^T], M = L L^T, R = G G^T. Used for the
/// minimum-norm reference at tiny alpha where CG loses accuracy.
RegularizedSolution tikhonov_solve_direct(const AssembledProblem& problem,
                                          double alpha);

struct LCurvePoint {
  double alpha = 0.0;
  double residual_norm = 0.0;
  double solution_norm = 0.0;
  /// Signed Menger curvature of (log rho, log eta); zero at the endpoints.
  double curvature = 0.0;
  /// Breaks residual or solution-norm monotonicity (noise floor reached).
  bool flagged = false;
};

struct LCurveResult {
  double alpha_star = 0.0;
  std::size_t index = 0;
  std::vector<LCurvePoint> points;
  std::vector<RegularizedSolution> solutions;
};

/// 16 log-spaced values from 1e-4 down to 1e-12.
std::vector<double> default_alpha_grid();

/// Solves at every alpha (decreasing, >= 10 values over >= 4 decades) and
/// picks the corner of maximal curvature. Solves run on `threads` workers.
LCurveResult lcurve_select(const AssembledProblem& problem,
                           const std::vector<double>& alpha_grid,
                           std::size_t threads = 1);

}  // namespace chid
