#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <span>

#include "chid/mesh.hpp"

namespace chid {

enum class BasisKind {
  quadratic_fe,           ///< periodic P2 Lagrange elements, 2 dofs per cell
  periodic_cubic_spline,  ///< uniform periodic cubic B-splines, 1 dof per cell
};

const char* to_string(BasisKind kind);

/// Spatial basis on a periodic mesh. Both families contain the constants and
/// consist of periodic functions.
///
/// Local numbering on cell i:
///   quadratic_fe:           dofs 2i, 2i+1 (midpoint), 2i+2 (wrapped)
///   periodic_cubic_spline:  B-splines centred at nodes i-1, i, i+1, i+2
class SpatialBasis {
 public:
  static constexpr std::size_t max_local = 4;

  SpatialBasis(BasisKind kind, PeriodicMesh mesh);

  BasisKind kind() const { return kind_; }
  const PeriodicMesh& mesh() const { return mesh_; }
  std::size_t dof_count() const;
  std::size_t local_count() const;
  /// Highest derivative order available by point evaluation.
  int max_order() const;

  /// Global indices of the basis functions supported on `cell`.
  std::array<std::size_t, max_local> local_dofs(std::size_t cell) const;

  /// Derivatives (w.r.t. x) of the local shape functions at local coordinate
  /// u in [0,1]. Entries past local_count() are zero.
  std::array<double, max_local> shape(double u, int order) const;

  bool operator==(const SpatialBasis&) const = default;

 private:
  BasisKind kind_;
  PeriodicMesh mesh_;
};

/// Coefficient vector of a periodic function in a given basis.
struct PeriodicField {
  SpatialBasis basis;
  Eigen::VectorXd coeffs;

  /// Value or derivative at x; x is wrapped onto [0,1).
  double eval(double x, int order = 0) const;
  /// Evaluation inside a known cell, skipping the locate step.
  double eval_local(std::size_t cell, double u, int order) const;
};

/// Throws ValidationError if `order` exceeds what the basis supports.
double eval_field(const PeriodicField& field, double x, int derivative_order);

/// Nodal interpolation: P2 at vertices and midpoints, splines at the mesh
/// nodes (cyclic system solved once per call).
PeriodicField interpolate(const SpatialBasis& basis,
                          const std::function<double(double)>& fn);

/// Periodic cubic spline through the given nodal values (one per node).
PeriodicField spline_from_nodal_values(const PeriodicMesh& mesh,
                                       const Eigen::VectorXd& values);

/// Vector of L2 pairings (g, psi_i) by Gauss quadrature with `points` per cell.
Eigen::VectorXd load_vector(const SpatialBasis& basis,
                            const std::function<double(double)>& g,
                            int points = 8);

/// Squared Sobolev norm sum_{j<=order} |d^j f|^2_{L2}, computed cellwise with
/// a rule exact for the basis polynomials.
double sobolev_norm_squared(const PeriodicField& field, int order);

}  // namespace chid
