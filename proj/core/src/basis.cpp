#include "chid/basis.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <cmath>
#include <string>

#include "chid/error.hpp"
#include "chid/quadrature.hpp"

namespace chid {

const char* to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::quadratic_fe:
      return "quadratic-fe";
    case BasisKind::periodic_cubic_spline:
      return "periodic-cubic-spline";
  }
  return "unknown";
}

SpatialBasis::SpatialBasis(BasisKind kind, PeriodicMesh mesh)
    : kind_(kind), mesh_(mesh) {}

std::size_t SpatialBasis::dof_count() const {
  return kind_ == BasisKind::quadratic_fe ? 2 * mesh_.n_cells()
                                          : mesh_.n_cells();
}

std::size_t SpatialBasis::local_count() const {
  return kind_ == BasisKind::quadratic_fe ? 3 : 4;
}

int SpatialBasis::max_order() const {
  return kind_ == BasisKind::quadratic_fe ? 2 : 3;
}

std::array<std::size_t, SpatialBasis::max_local> SpatialBasis::local_dofs(
    std::size_t cell) const {
  std::array<std::size_t, max_local> out{};
  const auto c = static_cast<std::ptrdiff_t>(cell);
  if (kind_ == BasisKind::quadratic_fe) {
    const std::size_t n = dof_count();
    out[0] = 2 * cell;
    out[1] = 2 * cell + 1;
    out[2] = (2 * cell + 2) % n;
  } else {
    for (std::ptrdiff_t k = 0; k < 4; ++k) out[k] = mesh_.wrap(c - 1 + k);
  }
  return out;
}

std::array<double, SpatialBasis::max_local> SpatialBasis::shape(
    double u, int order) const {
  std::array<double, max_local> s{};
  const double scale = std::pow(mesh_.h(), -order);
  if (kind_ == BasisKind::quadratic_fe) {
    switch (order) {
      case 0:
        s = {(1.0 - u) * (1.0 - 2.0 * u), 4.0 * u * (1.0 - u),
             u * (2.0 * u - 1.0), 0.0};
        break;
      case 1:
        s = {4.0 * u - 3.0, 4.0 - 8.0 * u, 4.0 * u - 1.0, 0.0};
        break;
      case 2:
        s = {4.0, -8.0, 4.0, 0.0};
        break;
      default:
        break;
    }
  } else {
    const double v = 1.0 - u;
    switch (order) {
      case 0:
        s = {v * v * v / 6.0, (3.0 * u * u * u - 6.0 * u * u + 4.0) / 6.0,
             (-3.0 * u * u * u + 3.0 * u * u + 3.0 * u + 1.0) / 6.0,
             u * u * u / 6.0};
        break;
      case 1:
        s = {-0.5 * v * v, 1.5 * u * u - 2.0 * u, -1.5 * u * u + u + 0.5,
             0.5 * u * u};
        break;
      case 2:
        s = {v, 3.0 * u - 2.0, 1.0 - 3.0 * u, u};
        break;
      case 3:
        s = {-1.0, 3.0, -3.0, 1.0};
        break;
      default:
        break;
    }
  }
  if (order > 0) {
    for (auto& x : s) x *= scale;
  }
  return s;
}

double PeriodicField::eval_local(std::size_t cell, double u, int order) const {
  const auto dofs = basis.local_dofs(cell);
  const auto s = basis.shape(u, order);
  double value = 0.0;
  for (std::size_t k = 0; k < basis.local_count(); ++k) {
    value += coeffs[static_cast<Eigen::Index>(dofs[k])] * s[k];
  }
  return value;
}

double PeriodicField::eval(double x, int order) const {
  const auto [cell, u] = basis.mesh().locate(x);
  return eval_local(cell, u, order);
}

double eval_field(const PeriodicField& field, double x, int derivative_order) {
  if (derivative_order < 0 || derivative_order > field.basis.max_order()) {
    throw ValidationError(std::string("derivative order ") +
                          std::to_string(derivative_order) +
                          " not available for basis " +
                          to_string(field.basis.kind()));
  }
  return field.eval(x, derivative_order);
}

PeriodicField spline_from_nodal_values(const PeriodicMesh& mesh,
                                       const Eigen::VectorXd& values) {
  const std::size_t n = mesh.n_cells();
  if (static_cast<std::size_t>(values.size()) != n) {
    throw ValidationError("nodal value count does not match the mesh");
  }
  // node value = (c_{i-1} + 4 c_i + c_{i+1}) / 6, cyclic and SPD
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    triplets.emplace_back(i, mesh.wrap(ii - 1), 1.0 / 6.0);
    triplets.emplace_back(i, i, 4.0 / 6.0);
    triplets.emplace_back(i, mesh.wrap(ii + 1), 1.0 / 6.0);
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(n));
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spline interpolation system is singular");
  }
  return PeriodicField{SpatialBasis(BasisKind::periodic_cubic_spline, mesh),
                       solver.solve(values)};
}

PeriodicField interpolate(const SpatialBasis& basis,
                          const std::function<double(double)>& fn) {
  const auto& mesh = basis.mesh();
  const std::size_t n = mesh.n_cells();
  if (basis.kind() == BasisKind::quadratic_fe) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(2 * n));
    for (std::size_t i = 0; i < n; ++i) {
      c[static_cast<Eigen::Index>(2 * i)] = fn(mesh.node(i));
      c[static_cast<Eigen::Index>(2 * i + 1)] =
          fn(mesh.node(i) + 0.5 * mesh.h());
    }
    return PeriodicField{basis, std::move(c)};
  }
  Eigen::VectorXd values(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    values[static_cast<Eigen::Index>(i)] = fn(mesh.node(i));
  }
  return spline_from_nodal_values(mesh, values);
}

Eigen::VectorXd load_vector(const SpatialBasis& basis,
                            const std::function<double(double)>& g,
                            int points) {
  const auto& rule = gauss_legendre(points);
  const auto& mesh = basis.mesh();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(basis.dof_count()));
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto dofs = basis.local_dofs(cell);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double u = rule.points[q];
      const double w = rule.weights[q] * mesh.h();
      const double gv = g(mesh.node(cell) + u * mesh.h());
      const auto s = basis.shape(u, 0);
      for (std::size_t k = 0; k < basis.local_count(); ++k) {
        out[static_cast<Eigen::Index>(dofs[k])] += w * gv * s[k];
      }
    }
  }
  return out;
}

double sobolev_norm_squared(const PeriodicField& field, int order) {
  if (order < 0 || order > field.basis.max_order()) {
    throw ValidationError("Sobolev order not available for this basis");
  }
  const auto& rule = gauss_legendre(4);
  const auto& mesh = field.basis.mesh();
  double total = 0.0;
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      double acc = 0.0;
      for (int j = 0; j <= order; ++j) {
        const double v = field.eval_local(cell, rule.points[q], j);
        acc += v * v;
      }
      total += rule.weights[q] * mesh.h() * acc;
    }
  }
  return total;
}

}  // namespace chid
