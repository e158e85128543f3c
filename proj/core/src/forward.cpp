#include "chid/forward.hpp"

#include <cmath>
#include <string>

#include "chid/error.hpp"
#include "chid/quadrature.hpp"

namespace chid {
namespace {

// f(phi) psi with P2 phi and the degree-6 paper potential is degree 12
constexpr int kNonlinearPoints = 7;

double l2_norm(const SparseMatrix& mass, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(mass * v)));
}

}  // namespace

std::size_t step_count(double T, double tau) {
  if (!(tau > 0.0)) throw ValidationError("time step must be positive");
  if (!(T > 0.0)) throw ValidationError("final time must be positive");
  const double ratio = T / tau;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * n) {
    throw ValidationError("T / tau must be an integer");
  }
  return static_cast<std::size_t>(n);
}

ForwardSolver::ForwardSolver(const PeriodicMesh& mesh, ModelParams params,
                             NewtonOptions options)
    : basis_(BasisKind::quadratic_fe, mesh),
      params_(std::move(params)),
      options_(options),
      mass_(assemble_grams(basis_).l2),
      stiffness_(assemble_stiffness(basis_)),
      h1_factor_(mass_ + stiffness_) {
  params_.validate();
  mass_factor_.compute(mass_);
  if (mass_factor_.info() != Eigen::Success) {
    throw NumericalError("P2 mass matrix factorization failed");
  }
}

PeriodicField ForwardSolver::chemical_potential(const PeriodicField& phi) const {
  if (!(phi.basis == basis_)) {
    throw ValidationError("phase field is not in the solver's P2 basis");
  }
  const PeriodicField& p = phi;
  Eigen::VectorXd rhs = params_.gamma * (stiffness_ * phi.coeffs);
  const auto& rule = gauss_legendre(kNonlinearPoints);
  const auto& mesh = basis_.mesh();
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto dofs = basis_.local_dofs(cell);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double u = rule.points[q];
      const double w = rule.weights[q] * mesh.h();
      const double fv = params_.f(p.eval_local(cell, u, 0));
      const auto s = basis_.shape(u, 0);
      for (std::size_t a = 0; a < 3; ++a) {
        rhs[static_cast<Eigen::Index>(dofs[a])] += w * fv * s[a];
      }
    }
  }
  return PeriodicField{basis_, mass_factor_.solve(rhs)};
}

double ForwardSolver::assemble(const Eigen::VectorXd& phi_n,
                               const Eigen::VectorXd& phi,
                               const Eigen::VectorXd& mu, double tau,
                               Eigen::VectorXd& residual,
                               SparseMatrix* jacobian) const {
  const auto& rule = gauss_legendre(kNonlinearPoints);
  const auto& mesh = basis_.mesh();
  const auto n = static_cast<Eigen::Index>(basis_.dof_count());
  const double gamma = params_.gamma;
  residual.setZero(2 * n);
  std::vector<Eigen::Triplet<double>> triplets;
  if (jacobian) triplets.reserve(mesh.n_cells() * 36);
  double bmin = std::numeric_limits<double>::infinity();

  const PeriodicField fphi{basis_, phi};
  const PeriodicField fphin{basis_, phi_n};
  const PeriodicField fmu{basis_, mu};

  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto dofs = basis_.local_dofs(cell);
    double rp[3] = {};
    double rm[3] = {};
    double jpp[3][3] = {};
    double jpm[3][3] = {};
    double jmp[3][3] = {};
    double jmm[3][3] = {};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double u = rule.points[q];
      const double w = rule.weights[q] * mesh.h();
      const auto s0 = basis_.shape(u, 0);
      const auto s1 = basis_.shape(u, 1);
      const double p = fphi.eval_local(cell, u, 0);
      const double dp = fphi.eval_local(cell, u, 1);
      const double pn = fphin.eval_local(cell, u, 0);
      const double m = fmu.eval_local(cell, u, 0);
      const double dm = fmu.eval_local(cell, u, 1);
      const double b = params_.b(p);
      const double fv = params_.f(p);
      bmin = std::min(bmin, b);
      for (std::size_t a = 0; a < 3; ++a) {
        rp[a] += w * ((p - pn) * s0[a] + tau * b * dm * s1[a]);
        rm[a] += w * (m * s0[a] - gamma * dp * s1[a] - fv * s0[a]);
      }
      if (jacobian) {
        const double db = params_.db(p);
        const double dfv = params_.df(p);
        for (std::size_t a = 0; a < 3; ++a) {
          for (std::size_t c = 0; c < 3; ++c) {
            jpp[a][c] += w * (s0[c] * s0[a] + tau * db * s0[c] * dm * s1[a]);
            jpm[a][c] += w * tau * b * s1[c] * s1[a];
            jmp[a][c] += w * (-gamma * s1[c] * s1[a] - dfv * s0[c] * s0[a]);
            jmm[a][c] += w * s0[c] * s0[a];
          }
        }
      }
    }
    for (std::size_t a = 0; a < 3; ++a) {
      const auto ia = static_cast<Eigen::Index>(dofs[a]);
      residual[ia] += rp[a];
      residual[n + ia] += rm[a];
      if (!jacobian) continue;
      for (std::size_t c = 0; c < 3; ++c) {
        const auto ic = static_cast<Eigen::Index>(dofs[c]);
        triplets.emplace_back(ia, ic, jpp[a][c]);
        triplets.emplace_back(ia, n + ic, jpm[a][c]);
        triplets.emplace_back(n + ia, ic, jmp[a][c]);
        triplets.emplace_back(n + ia, n + ic, jmm[a][c]);
      }
    }
  }
  if (!(bmin > 0.0)) {
    throw NumericalError("mobility positivity violation: b(phi) = " +
                         std::to_string(bmin));
  }
  if (jacobian) {
    jacobian->resize(2 * n, 2 * n);
    jacobian->setFromTriplets(triplets.begin(), triplets.end());
  }
  return h1_factor_.dual_norm(residual.head(n)) +
         h1_factor_.dual_norm(residual.tail(n));
}

ForwardSolver::StepState ForwardSolver::newton(const Eigen::VectorXd& phi_n,
                                               const Eigen::VectorXd& mu_guess,
                                               double tau) const {
  const auto n = static_cast<Eigen::Index>(basis_.dof_count());
  Eigen::VectorXd phi = phi_n;
  Eigen::VectorXd mu = mu_guess;
  Eigen::VectorXd residual;
  SparseMatrix jac;
  Eigen::SparseLU<SparseMatrix> lu;
  bool analyzed = false;
  double norm = assemble(phi_n, phi, mu, tau, residual, &jac);
  for (int it = 0; it < options_.max_iterations; ++it) {
    if (norm <= options_.tolerance) {
      last_iterations_ = it;
      return {std::move(phi), std::move(mu)};
    }
    jac.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) {
      throw NumericalError("Newton Jacobian is singular");
    }
    const Eigen::VectorXd delta = lu.solve(residual);
    phi -= delta.head(n);
    mu -= delta.tail(n);
    if (!phi.allFinite() || !mu.allFinite()) break;
    norm = assemble(phi_n, phi, mu, tau, residual, &jac);
  }
  if (norm <= options_.tolerance) {
    last_iterations_ = options_.max_iterations;
    return {std::move(phi), std::move(mu)};
  }
  throw NumericalError("Newton did not converge (residual " +
                       std::to_string(norm) + ")");
}

ForwardSolver::StepState ForwardSolver::advance(const StepState& state,
                                                double tau, int depth) const {
  try {
    return newton(state.phi, state.mu, tau);
  } catch (const NumericalError& e) {
    if (depth >= options_.max_bisections ||
        std::string(e.what()).starts_with("mobility")) {
      throw;
    }
  }
  const StepState half = advance(state, 0.5 * tau, depth + 1);
  return advance(half, 0.5 * tau, depth + 1);
}

std::pair<PeriodicField, PeriodicField> ForwardSolver::step(
    const PeriodicField& phi_n, double tau) const {
  if (!(tau > 0.0)) throw ValidationError("time step must be positive");
  const PeriodicField mu0 = chemical_potential(phi_n);
  StepState s = newton(phi_n.coeffs, mu0.coeffs, tau);
  return {PeriodicField{basis_, std::move(s.phi)},
          PeriodicField{basis_, std::move(s.mu)}};
}

Trajectory ForwardSolver::simulate(const PeriodicField& phi0, double T,
                                   double tau) const {
  const std::size_t steps = step_count(T, tau);
  Trajectory traj{basis_, tau, {}, {}, {}};
  traj.times.reserve(steps + 1);
  traj.phi.reserve(steps + 1);
  traj.mu.reserve(steps + 1);
  StepState state{phi0.coeffs, chemical_potential(phi0).coeffs};
  traj.times.push_back(0.0);
  traj.phi.push_back(state.phi);
  traj.mu.push_back(state.mu);
  for (std::size_t k = 1; k <= steps; ++k) {
    try {
      state = advance(state, tau, 0);
    } catch (const NumericalError& e) {
      throw NumericalError("forward solve failed at step " + std::to_string(k) +
                           " (t = " + std::to_string(static_cast<double>(k) * tau) +
                           "): " + e.what());
    }
    traj.times.push_back(static_cast<double>(k) * tau);
    traj.phi.push_back(state.phi);
    traj.mu.push_back(state.mu);
  }
  return traj;
}

std::pair<PeriodicField, PeriodicField> step(const PeriodicField& phi_n,
                                             const ModelParams& params,
                                             double tau) {
  return ForwardSolver(phi_n.basis.mesh(), params).step(phi_n, tau);
}

Trajectory simulate(const PeriodicField& phi0, const ModelParams& params,
                    double T, double tau) {
  return ForwardSolver(phi0.basis.mesh(), params).simulate(phi0, T, tau);
}

ScalingInvarianceReport verify_scaling_invariance(const PeriodicField& phi0,
                                                  const ModelParams& params,
                                                  double d, double c, double T,
                                                  double tau) {
  const ModelParams scaled = scale_params(params, d, c);
  const Trajectory a = simulate(phi0, params, T, tau);
  const Trajectory b = simulate(phi0, scaled, T, tau);
  const SparseMatrix mass_matrix = assemble_grams(a.basis).l2;
  // the constant function has coefficient vector 1 in the P2 basis
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(a.phi.front().size());
  ScalingInvarianceReport report;
  report.bitwise_identical = true;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double ref = l2_norm(mass_matrix, a.phi[k]);
    const double dphi = l2_norm(mass_matrix, b.phi[k] - a.phi[k]);
    report.phi_relative_deviation =
        std::max(report.phi_relative_deviation, ref > 0.0 ? dphi / ref : dphi);
    const Eigen::VectorXd expected = a.mu[k] / d + c * one;
    report.mu_deviation =
        std::max(report.mu_deviation, l2_norm(mass_matrix, b.mu[k] - expected));
    if (a.phi[k] != b.phi[k] || a.mu[k] != b.mu[k]) {
      report.bitwise_identical = false;
    }
  }
  return report;
}

}  // namespace chid
