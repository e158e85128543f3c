#pragma once

#include <cstddef>
#include <utility>

namespace chid {

/// Uniform mesh of the unit interval with its endpoints identified (1-torus).
class PeriodicMesh {
 public:
  /// Throws ValidationError for fewer than 4 cells.
  explicit PeriodicMesh(std::size_t n_cells);

  std::size_t n_cells() const { return n_cells_; }
  double h() const { return h_; }
  double node(std::size_t i) const { return static_cast<double>(i) * h_; }

  /// Index modulo n_cells, accepting negative input.
  std::size_t wrap(std::ptrdiff_t i) const;

  /// Maps x onto [0,1).
  static double wrap_point(double x);

  /// Cell containing the (wrapped) point and the local coordinate in [0,1).
  std::pair<std::size_t, double> locate(double x) const;

  bool operator==(const PeriodicMesh&) const = default;

 private:
  std::size_t n_cells_;
  double h_;
};

PeriodicMesh build_mesh(std::size_t n_cells);

}  // namespace chid
