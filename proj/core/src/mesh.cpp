#include "chid/mesh.hpp"

#include <cmath>
#include <string>

#include "chid/error.hpp"

namespace chid {

PeriodicMesh::PeriodicMesh(std::size_t n_cells) : n_cells_(n_cells), h_(0.0) {
  if (n_cells < 4) {
    throw ValidationError("periodic mesh needs at least 4 cells, got " +
                          std::to_string(n_cells));
  }
  h_ = 1.0 / static_cast<double>(n_cells);
}

std::size_t PeriodicMesh::wrap(std::ptrdiff_t i) const {
  const auto n = static_cast<std::ptrdiff_t>(n_cells_);
  auto r = i % n;
  if (r < 0) r += n;
  return static_cast<std::size_t>(r);
}

double PeriodicMesh::wrap_point(double x) {
  double r = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1
  if (r >= 1.0) r = 0.0;
  return r;
}

std::pair<std::size_t, double> PeriodicMesh::locate(double x) const {
  const double xw = wrap_point(x) * static_cast<double>(n_cells_);
  auto cell = static_cast<std::size_t>(xw);
  if (cell >= n_cells_) cell = n_cells_ - 1;
  double u = xw - static_cast<double>(cell);
  if (u < 0.0) u = 0.0;
  return {cell, u};
}

PeriodicMesh build_mesh(std::size_t n_cells) { return PeriodicMesh(n_cells); }

}  // namespace chid
