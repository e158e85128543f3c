#include "chid/gram.hpp"

#include <cmath>
#include <vector>

#include "chid/error.hpp"
#include "chid/quadrature.hpp"

namespace chid {
namespace {

// products of basis functions are at most degree 6; 4 points integrate them
// exactly
constexpr int kGramPoints = 4;

SparseMatrix assemble_product(const SpatialBasis& basis, int order) {
  const auto& rule = gauss_legendre(kGramPoints);
  const auto& mesh = basis.mesh();
  const auto n = static_cast<Eigen::Index>(basis.dof_count());
  const std::size_t nl = basis.local_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.n_cells() * nl * nl);
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto dofs = basis.local_dofs(cell);
    double local[SpatialBasis::max_local][SpatialBasis::max_local] = {};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto s = basis.shape(rule.points[q], order);
      const double w = rule.weights[q] * mesh.h();
      for (std::size_t a = 0; a < nl; ++a) {
        for (std::size_t b = 0; b < nl; ++b) local[a][b] += w * s[a] * s[b];
      }
    }
    for (std::size_t a = 0; a < nl; ++a) {
      for (std::size_t b = 0; b < nl; ++b) {
        triplets.emplace_back(dofs[a], dofs[b], local[a][b]);
      }
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace

GramPair assemble_grams(const SpatialBasis& basis) {
  GramPair g;
  g.l2 = assemble_product(basis, 0);
  g.h1 = g.l2 + assemble_product(basis, 1);
  return g;
}

SparseMatrix assemble_stiffness(const SpatialBasis& basis) {
  return assemble_product(basis, 1);
}

GramFactor::GramFactor(const SparseMatrix& m) : size_(m.rows()) {
  llt_.compute(m);
  if (llt_.info() != Eigen::Success) {
    throw NumericalError("gram matrix is not symmetric positive definite");
  }
}

Eigen::VectorXd GramFactor::solve(const Eigen::VectorXd& y) const {
  return llt_.solve(y);
}

Eigen::MatrixXd GramFactor::solve(const Eigen::MatrixXd& y) const {
  return llt_.solve(y);
}

double GramFactor::dual_norm(const Eigen::VectorXd& y) const {
  const double q = y.dot(solve(y));
  return std::sqrt(std::max(q, 0.0));
}

std::shared_ptr<const GramFactor> GramFactor::identity(Eigen::Index n) {
  SparseMatrix eye(n, n);
  eye.setIdentity();
  return std::make_shared<const GramFactor>(eye);
}

double dual_norm_hm1(const Eigen::VectorXd& y, const GramPair& grams) {
  return GramFactor(grams.h1).dual_norm(y);
}

double dual_norm_hm1(const Eigen::VectorXd& y, const GramFactor& factor) {
  return factor.dual_norm(y);
}

}  // namespace chid
