#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <memory>

#include "chid/basis.hpp"

namespace chid {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// H1 and L2 gram matrices of a spatial basis. Banded with wraparound.
struct GramPair {
  SparseMatrix h1;
  SparseMatrix l2;
};

GramPair assemble_grams(const SpatialBasis& basis);

/// Stiffness matrix (psi_j', psi_i') of the basis.
SparseMatrix assemble_stiffness(const SpatialBasis& basis);

/// Cholesky factorization of an SPD gram matrix, computed once and shared
/// read-only between consumers.
class GramFactor {
 public:
  /// Throws NumericalError if the matrix is not SPD.
  explicit GramFactor(const SparseMatrix& m);

  Eigen::Index size() const { return size_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& y) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& y) const;
  /// sqrt(y^T M^{-1} y)
  double dual_norm(const Eigen::VectorXd& y) const;

  static std::shared_ptr<const GramFactor> identity(Eigen::Index n);

 private:
  Eigen::Index size_;
  Eigen::SimplicialLLT<SparseMatrix> llt_;
};

/// Discrete H^{-1} norm of a functional vector (entries are pairings with the
/// basis functions): sqrt(y^T M^{-1} y) with M the H1 gram.
double dual_norm_hm1(const Eigen::VectorXd& y, const GramPair& grams);
double dual_norm_hm1(const Eigen::VectorXd& y, const GramFactor& factor);

}  // namespace chid
