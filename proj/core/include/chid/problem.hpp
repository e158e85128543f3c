#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chid/gram.hpp"
#include "chid/model.hpp"
#include "chid/observation.hpp"

namespace chid {

enum class ProblemKind { identify_f, identify_b, identify_joint };

const char* to_string(ProblemKind kind);
/// Accepts "identify-f", "identify-b", "identify-joint".
ProblemKind parse_problem_kind(const std::string& name);

/// Rows of the equation-error system belonging to one data instant.
struct TimeBlock {
  double time = 0.0;
  std::size_t index = 0;  ///< data index k
  Eigen::MatrixXd T;
  Eigen::VectorXd y;
};

/// Linear system T x = y stacked over time blocks. Every block is measured in
/// the dual norm of the shared H1 gram M. Immutable once built.
struct AssembledProblem {
  ProblemKind kind = ProblemKind::identify_f;
  std::vector<TimeBlock> blocks;
  std::shared_ptr<const GramFactor> M;
  /// Regularizer gram; block-diagonal (b, c) for the joint problem.
  Eigen::MatrixXd R;
  KnotGrid grid;
  std::uint64_t data_fingerprint = 0;
  std::vector<std::string> warnings;

  Eigen::Index cols() const { return R.cols(); }
  Eigen::Index rows() const;
  Eigen::MatrixXd stacked_T() const;
  Eigen::VectorXd stacked_y() const;
  /// sqrt(sum_k (T_k x - y_k)^T M^{-1} (T_k x - y_k))
  double residual_norm(const Eigen::VectorXd& x) const;
};

// Below, phi''' denotes the derivative of projected_laplacian(phi).

struct AssemblyOptions {
  KnotGrid grid;                     ///< parameter knots, default [-1,1] step 0.1
  std::size_t quadrature_points = 6;  ///< Gauss points per data cell
  std::size_t threads = 1;
};

/// Unknown c = b f'. Columns -(theta_j(phi) phi', psi_i'), right-hand side
/// (d_tau phi, psi_i) - gamma (b(phi) phi''', psi_i').
AssembledProblem assemble_identify_f(const ObservationData& data, double gamma,
                                     const ParameterFunction& mobility,
                                     std::span<const std::size_t> indices,
                                     const AssemblyOptions& options = {});

/// Unknown b. Columns -(theta_j(phi) mu', psi_i'), right-hand side
/// (d_tau phi, psi_i), with mu rebuilt from the data and the known potential.
AssembledProblem assemble_identify_b(const ObservationData& data, double gamma,
                                     const ParameterFunction& potential,
                                     std::span<const std::size_t> indices,
                                     const AssemblyOptions& options = {});

/// Unknowns (b, c). b-columns gamma (theta_j(phi) phi''', psi_i'), c-columns
/// -(theta_j(phi) phi', psi_i'). Fewer than two instants only adds a warning.
AssembledProblem assemble_identify_joint(const ObservationData& data,
                                         double gamma,
                                         std::span<const std::size_t> indices,
                                         const AssemblyOptions& options = {});

}  // namespace chid
