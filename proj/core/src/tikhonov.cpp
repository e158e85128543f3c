#include "chid/tikhonov.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <sstream>

#include "chid/error.hpp"
#include "chid/parallel.hpp"

namespace chid {
namespace {

using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("regularization parameter must be positive");
  }
}

RegularizedSolution finish(const AssembledProblem& problem, Eigen::VectorXd x,
                           double alpha) {
  RegularizedSolution s;
  s.alpha = alpha;
  s.residual_norm = problem.residual_norm(x);
  s.solution_norm = std::sqrt(std::max(x.dot(problem.R * x), 0.0));
  s.coefficients = std::move(x);
  return s;
}

}  // namespace

NormalEquations normal_equations(const AssembledProblem& problem) {
  const Eigen::Index n = problem.cols();
  NormalEquations ne;
  ne.N = Eigen::MatrixXd::Zero(n, n);
  ne.rhs = Eigen::VectorXd::Zero(n);
  for (const auto& b : problem.blocks) {
    const Eigen::MatrixXd MinvT = problem.M->solve(Eigen::MatrixXd(b.T));
    ne.N.noalias() += b.T.transpose() * MinvT;
    ne.rhs.noalias() += MinvT.transpose() * b.y;
  }
  ne.N = 0.5 * (ne.N + ne.N.transpose()).eval();
  ne.R = problem.R;
  return ne;
}

RegularizedSolution tikhonov_solve(const AssembledProblem& problem,
                                   double alpha, const CgOptions& cg) {
  return tikhonov_solve(problem, normal_equations(problem), alpha, cg);
}

RegularizedSolution tikhonov_solve(const AssembledProblem& problem,
                                   const NormalEquations& ne, double alpha,
                                   const CgOptions& cg) {
  check_alpha(alpha);
  const Eigen::Index n = ne.N.rows();
  const MatrixL R = ne.R.cast<long double>();
  const MatrixL A = ne.N.cast<long double>() + static_cast<long double>(alpha) * R;
  const VectorL b = ne.rhs.cast<long double>();
  const Eigen::LLT<MatrixL> prec(R);
  if (prec.info() != Eigen::Success) {
    throw NumericalError("regularizer gram is not positive definite");
  }
  const std::size_t max_it =
      cg.max_iterations ? cg.max_iterations : 50 * static_cast<std::size_t>(n);

  VectorL x = VectorL::Zero(n);
  const long double bnorm = std::sqrt(b.dot(prec.solve(b)));
  std::size_t it = 0;
  long double rel = 0.0L;
  if (bnorm > 0.0L) {
    // conjugate directions are kept for the current sweep and each new one is
    // A-orthogonalized against all of them; a sweep ends after n steps and the
    // next one restarts from the true residual
    std::vector<VectorL> P;
    std::vector<VectorL> AP;
    std::vector<long double> pAp;
    VectorL r = b;
    rel = 1.0L;
    while (true) {
      const VectorL z = prec.solve(r);
      rel = std::sqrt(std::max(r.dot(z), 0.0L)) / bnorm;
      if (rel <= cg.tolerance) break;
      if (it >= max_it) {
        std::ostringstream msg;
        msg << "CG stagnated after " << it << " iterations at relative residual "
            << static_cast<double>(rel) << " (alpha = " << alpha << ")";
        throw NumericalError(msg.str());
      }
      VectorL p = z;
      for (std::size_t j = 0; j < P.size(); ++j) {
        p -= (AP[j].dot(p) / pAp[j]) * P[j];
      }
      VectorL Ap = A * p;
      const long double curv = p.dot(Ap);
      if (!(curv > 0.0L)) {
        throw NumericalError("normal matrix is not positive definite");
      }
      const long double step = r.dot(p) / curv;
      x += step * p;
      ++it;
      if (P.size() + 1 >= static_cast<std::size_t>(n)) {
        P.clear();
        AP.clear();
        pAp.clear();
        r = b - A * x;
      } else {
        r -= step * Ap;
        P.push_back(std::move(p));
        AP.push_back(std::move(Ap));
        pAp.push_back(curv);
      }
    }
  }
  RegularizedSolution s = finish(problem, x.cast<double>(), alpha);
  s.cg_iterations = it;
  s.normal_residual = static_cast<double>(rel);
  return s;
}

RegularizedSolution tikhonov_solve_direct(const AssembledProblem& problem,
                                          double alpha) {
  check_alpha(alpha);
  const Eigen::Index n = problem.cols();
  const Eigen::Index ndof = problem.M->size();
  Eigen::MatrixXd Mdense = problem.M->solve(Eigen::MatrixXd(
      Eigen::MatrixXd::Identity(ndof, ndof)));
  // Mdense holds M^{-1}; whitening uses its Cholesky factor directly
  const Eigen::LLT<Eigen::MatrixXd> minv(0.5 * (Mdense + Mdense.transpose()));
  const Eigen::LLT<Eigen::MatrixXd> rfac(problem.R);
  if (minv.info() != Eigen::Success || rfac.info() != Eigen::Success) {
    throw NumericalError("gram factorization failed in direct solve");
  }
  const Eigen::MatrixXd Lt = minv.matrixU();  // M^{-1} = Lt^T Lt
  const Eigen::Index rows = problem.rows() + n;
  Eigen::MatrixXd A(rows, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  Eigen::Index r = 0;
  for (const auto& b : problem.blocks) {
    A.middleRows(r, ndof) = Lt * b.T;
    rhs.segment(r, ndof) = Lt * b.y;
    r += ndof;
  }
  A.bottomRows(n) = std::sqrt(alpha) * Eigen::MatrixXd(rfac.matrixU());
  const Eigen::VectorXd x = A.colPivHouseholderQr().solve(rhs);
  RegularizedSolution s = finish(problem, x, alpha);
  const NormalEquations ne = normal_equations(problem);
  const Eigen::VectorXd res = ne.rhs - (ne.N + alpha * ne.R) * x;
  const double bn = std::sqrt(ne.rhs.dot(rfac.solve(ne.rhs)));
  s.normal_residual =
      bn > 0.0 ? std::sqrt(std::max(res.dot(rfac.solve(res)), 0.0)) / bn : 0.0;
  return s;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> g(16);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = std::pow(10.0, -4.0 - 8.0 * static_cast<double>(i) / 15.0);
  }
  return g;
}

LCurveResult lcurve_select(const AssembledProblem& problem,
                           const std::vector<double>& alpha_grid,
                           std::size_t threads) {
  if (alpha_grid.size() < 10) {
    throw ValidationError("L-curve grid needs at least 10 values");
  }
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    check_alpha(alpha_grid[i]);
    if (i > 0 && !(alpha_grid[i] < alpha_grid[i - 1])) {
      throw ValidationError("L-curve grid must be strictly decreasing");
    }
  }
  if (std::log10(alpha_grid.front() / alpha_grid.back()) < 4.0 - 1e-9) {
    throw ValidationError("L-curve grid must span at least 4 decades");
  }
  const NormalEquations ne = normal_equations(problem);
  LCurveResult out;
  out.solutions.resize(alpha_grid.size());
  parallel_for(alpha_grid.size(), threads, [&](std::size_t i) {
    out.solutions[i] = tikhonov_solve(problem, ne, alpha_grid[i]);
  });
  const std::size_t m = alpha_grid.size();
  out.points.resize(m);
  std::vector<double> lx(m);
  std::vector<double> ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto& pt = out.points[i];
    pt.alpha = alpha_grid[i];
    pt.residual_norm = out.solutions[i].residual_norm;
    pt.solution_norm = out.solutions[i].solution_norm;
    lx[i] = std::log(std::max(pt.residual_norm, 1e-300));
    ly[i] = std::log(std::max(pt.solution_norm, 1e-300));
    if (i > 0) {
      const auto& prev = out.points[i - 1];
      const double tol = 1e-10;
      pt.flagged = pt.residual_norm > prev.residual_norm * (1.0 + tol) ||
                   pt.solution_norm < prev.solution_norm * (1.0 - tol);
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  out.index = 1;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double ax = lx[i] - lx[i - 1], ay = ly[i] - ly[i - 1];
    const double bx = lx[i + 1] - lx[i], by = ly[i + 1] - ly[i];
    const double cx = lx[i + 1] - lx[i - 1], cy = ly[i + 1] - ly[i - 1];
    const double la = std::hypot(ax, ay), lb = std::hypot(bx, by),
                 lc = std::hypot(cx, cy);
    const double denom = la * lb * lc;
    const double kappa = denom > 0.0 ? 2.0 * (ax * by - ay * bx) / denom : 0.0;
    out.points[i].curvature = kappa;
    // with decreasing alpha the corner turns clockwise
    if (-kappa > best) {
      best = -kappa;
      out.index = i;
    }
  }
  out.alpha_star = alpha_grid[out.index];
  return out;
}

}  // namespace chid
