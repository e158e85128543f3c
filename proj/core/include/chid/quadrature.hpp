#pragma once

#include <vector>

namespace chid {

/// Gauss-Legendre rule mapped to [0,1].
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// n-point rule, exact for polynomials of degree 2n-1. Cached per n.
const GaussRule& gauss_legendre(int n);

}  // namespace chid
