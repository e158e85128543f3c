#pragma once

#include <Eigen/Core>
#include <Eigen/SparseLU>
#include <utility>
#include <vector>

#include "chid/basis.hpp"
#include "chid/gram.hpp"
#include "chid/model.hpp"

namespace chid {

struct NewtonOptions {
  /// Bound on ||r_phi||_{H^-1} + ||r_mu||_{H^-1} of the step residual.
  double tolerance = 1e-12;
  int max_iterations = 25;
  /// Maximum depth of step halving after a Newton failure.
  int max_bisections = 8;
};

/// Stored forward solution: states at times[k] = k * tau, P2 coefficients of
/// phi and mu.
struct Trajectory {
  SpatialBasis basis;
  double tau = 0.0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> phi;
  std::vector<Eigen::VectorXd> mu;

  std::size_t size() const { return times.size(); }
  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
  PeriodicField phi_field(std::size_t k) const { return {basis, phi[k]}; }
  PeriodicField mu_field(std::size_t k) const { return {basis, mu[k]}; }
};

/// Implicit Euler for the mixed Cahn-Hilliard system with P2 elements for phi
/// and mu, solved by Newton's method:
///
///   (phi - phi_n, v) + tau (b(phi) mu', v') = 0
///   (mu, w) - gamma (phi', w') - (f(phi), w) = 0
///
/// Mass is conserved exactly because v = 1 lies in the test space.
class ForwardSolver {
 public:
  ForwardSolver(const PeriodicMesh& mesh, ModelParams params,
                NewtonOptions options = {});

  const SpatialBasis& basis() const { return basis_; }
  const ModelParams& params() const { return params_; }

  /// Discrete mu = -gamma phi'' + f(phi) in weak form (L2 projection).
  PeriodicField chemical_potential(const PeriodicField& phi) const;

  /// One time step from phi_n; returns (phi_{n+1}, mu_{n+1}). Throws
  /// NumericalError when Newton does not converge or b(phi) <= 0.
  std::pair<PeriodicField, PeriodicField> step(const PeriodicField& phi_n,
                                               double tau) const;

  /// Integrates to time T with uniform step tau; failing steps are halved up
  /// to NewtonOptions::max_bisections times.
  Trajectory simulate(const PeriodicField& phi0, double T, double tau) const;

  /// Newton iterations used by the most recent successful solve (diagnostic).
  int last_iterations() const { return last_iterations_; }

 private:
  struct StepState {
    Eigen::VectorXd phi;
    Eigen::VectorXd mu;
  };

  StepState newton(const Eigen::VectorXd& phi_n, const Eigen::VectorXd& mu_guess,
                   double tau) const;
  StepState advance(const StepState& state, double tau, int depth) const;
  double assemble(const Eigen::VectorXd& phi_n, const Eigen::VectorXd& phi,
                  const Eigen::VectorXd& mu, double tau, Eigen::VectorXd& residual,
                  SparseMatrix* jacobian) const;

  SpatialBasis basis_;
  ModelParams params_;
  NewtonOptions options_;
  SparseMatrix mass_;
  SparseMatrix stiffness_;
  GramFactor h1_factor_;
  Eigen::SimplicialLLT<SparseMatrix> mass_factor_;
  mutable int last_iterations_ = 0;
};

std::pair<PeriodicField, PeriodicField> step(const PeriodicField& phi_n,
                                             const ModelParams& params,
                                             double tau);

Trajectory simulate(const PeriodicField& phi0, const ModelParams& params,
                    double T, double tau);

struct ScalingInvarianceReport {
  /// max_k ||phi_hat_k - phi_k||_{L2} / ||phi_k||_{L2}
  double phi_relative_deviation = 0.0;
  /// max_k ||mu_hat_k - (mu_k / d + c)||_{L2}
  double mu_deviation = 0.0;
  bool bitwise_identical = false;
};

/// Runs the original and the (d, c)-transformed model from the same initial
/// state and compares the trajectories.
ScalingInvarianceReport verify_scaling_invariance(const PeriodicField& phi0,
                                                  const ModelParams& params,
                                                  double d, double c, double T,
                                                  double tau);

/// Number of steps T / tau; throws ValidationError unless it is integral.
std::size_t step_count(double T, double tau);

}  // namespace chid
