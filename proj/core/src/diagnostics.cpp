#include "chid/diagnostics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "chid/error.hpp"
#include "chid/quadrature.hpp"

namespace chid {
namespace {

// Local polynomial a0 + a1 u + a2 u^2 + a3 u^3 of a field on one cell.
struct LocalCubic {
  std::array<double, 4> a;

  double operator()(double u) const {
    return ((a[3] * u + a[2]) * u + a[1]) * u + a[0];
  }
  double derivative(double u) const {
    return (3.0 * a[3] * u + 2.0 * a[2]) * u + a[1];
  }
};

LocalCubic local_cubic(const PeriodicField& f, std::size_t cell) {
  const double h = f.basis.mesh().h();
  LocalCubic c{};
  c.a[0] = f.eval_local(cell, 0.0, 0);
  c.a[1] = f.eval_local(cell, 0.0, 1) * h;
  c.a[2] = f.eval_local(cell, 0.0, 2) * h * h / 2.0;
  c.a[3] = f.basis.max_order() >= 3
               ? f.eval_local(cell, 0.0, 3) * h * h * h / 6.0
               : 0.0;
  return c;
}

// Critical points of the cubic strictly inside (0,1), ascending.
std::vector<double> critical_points(const LocalCubic& p) {
  std::vector<double> out;
  const double a = 3.0 * p.a[3];
  const double b = 2.0 * p.a[2];
  const double c = p.a[1];
  const double scale = std::abs(a) + std::abs(b) + std::abs(c);
  if (scale == 0.0) return out;
  if (std::abs(a) <= 1e-14 * scale) {
    if (std::abs(b) > 1e-14 * scale) out.push_back(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (b + std::copysign(sq, b));
      out.push_back(q / a);
      if (q != 0.0) out.push_back(c / q);
    }
  }
  std::erase_if(out, [](double u) { return !(u > 0.0 && u < 1.0); });
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t sample_count(const PeriodicField& f) {
  return std::max<std::size_t>(10000, 100 * f.basis.mesh().n_cells());
}

}  // namespace

IntervalSet attained_range(const PeriodicField& phi) {
  const auto& mesh = phi.basis.mesh();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    const LocalCubic p = local_cubic(phi, cell);
    for (double u : critical_points(p)) {
      const double v = phi.eval_local(cell, u, 0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double v = phi.eval_local(cell, 0.0, 0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const std::size_t n = sample_count(phi);
  for (std::size_t j = 0; j < n; ++j) {
    const double v = phi.eval(static_cast<double>(j) / static_cast<double>(n), 0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return IntervalSet{{lo, hi}};
}

IntervalSet attained_range(const ObservationData& data, std::size_t k) {
  return attained_range(data.field(k));
}

IntervalSet attained_range(const ObservationData& data,
                           std::span<const std::size_t> ks) {
  IntervalSet out;
  for (std::size_t k : ks) out.add(attained_range(data, k));
  return out;
}

IntervalSet observable_range(const PeriodicField& phi, const PeriodicField& mu,
                             std::optional<double> threshold) {
  const std::size_t n = sample_count(phi);
  std::vector<double> values(n);
  std::vector<double> grad(n);
  double gmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(n);
    values[j] = phi.eval(x, 0);
    grad[j] = std::abs(mu.eval(x, 1));
    gmax = std::max(gmax, grad[j]);
  }
  // gradients below the round-off level of the projection count as zero
  double mu_max = 0.0;
  for (double c : mu.coeffs) mu_max = std::max(mu_max, std::abs(c));
  const double floor = 1e-9 * (1.0 + mu_max) / phi.basis.mesh().h();
  const double thr = std::max(
      threshold.value_or(kRelativeObservabilityThreshold * gmax), floor);
  IntervalSet out;
  std::size_t start = n;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(grad[j] > thr)) {
      start = j;
      break;
    }
  }
  if (start == n) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    out.add({*lo, *hi});
    return out;
  }
  // walk the periodic sample once, starting at a point that fails the test
  bool in_run = false;
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t step = 0; step <= n; ++step) {
    const std::size_t j = (start + step) % n;
    const bool pass = step < n && grad[j] > thr;
    if (pass) {
      if (!in_run) {
        lo = hi = values[j];
        in_run = true;
      } else {
        lo = std::min(lo, values[j]);
        hi = std::max(hi, values[j]);
      }
    } else if (in_run) {
      out.add({lo, hi});
      in_run = false;
    }
  }
  return out;
}

IntervalSet observable_range(const ObservationData& data, double gamma,
                             const ParameterFunction& potential, std::size_t k,
                             std::optional<double> threshold) {
  return observable_range(data.field(k),
                          chemical_potential_from_data(data, k, gamma, potential),
                          threshold);
}

IntervalSet observable_range(const ObservationData& data, double gamma,
                             const ParameterFunction& potential,
                             std::span<const std::size_t> ks,
                             std::optional<double> threshold) {
  IntervalSet out;
  for (std::size_t k : ks) {
    out.add(observable_range(data, gamma, potential, k, threshold));
  }
  return out;
}

std::vector<Crossing> level_crossings(const PeriodicField& phi, double s) {
  const auto& mesh = phi.basis.mesh();
  const std::size_t n = mesh.n_cells();
  // canonical nodal values so neighbouring cells agree at shared knots
  std::vector<double> nodal(n);
  for (std::size_t i = 0; i < n; ++i) nodal[i] = phi.eval_local(i, 0.0, 0);

  std::vector<Crossing> out;
  for (std::size_t cell = 0; cell < n; ++cell) {
    const LocalCubic p = local_cubic(phi, cell);
    std::vector<double> knots{0.0};
    for (double u : critical_points(p)) knots.push_back(u);
    knots.push_back(1.0);
    auto value_at = [&](std::size_t idx) {
      if (idx == 0) return nodal[cell];
      if (idx + 1 == knots.size()) return nodal[(cell + 1) % n];
      return p(knots[idx]);
    };
    for (std::size_t seg = 0; seg + 1 < knots.size(); ++seg) {
      const bool above0 = value_at(seg) > s;
      const bool above1 = value_at(seg + 1) > s;
      if (above0 == above1) continue;
      double a = knots[seg];
      double b = knots[seg + 1];
      // bisection keeps the bracket on a monotone piece
      for (int it = 0; it < 200 && b - a > 4e-16; ++it) {
        const double m = 0.5 * (a + b);
        if ((p(m) > s) == above0) {
          a = m;
        } else {
          b = m;
        }
      }
      const double u = 0.5 * (a + b);
      out.push_back(Crossing{mesh.node(cell) + u * mesh.h(), cell, u,
                             above1 ? +1 : -1});
    }
  }
  return out;
}

CoareaCoefficients coarea_coefficients(const PeriodicField& phi,
                                       const PeriodicField& dphi_dt,
                                       double gamma, double s,
                                       double relative_degeneracy) {
  if (!(phi.basis == dphi_dt.basis)) {
    throw ValidationError("phase field and time derivative use different bases");
  }
  const auto& mesh = phi.basis.mesh();
  const auto crossings = level_crossings(phi, s);
  const PeriodicField lap = projected_laplacian(phi);
  double grad_scale = 0.0;
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    grad_scale = std::max(grad_scale, std::abs(phi.eval_local(cell, 0.0, 1)));
    grad_scale = std::max(grad_scale, std::abs(phi.eval_local(cell, 0.5, 1)));
  }
  CoareaCoefficients out;
  out.crossings = crossings.size();
  for (const auto& c : crossings) {
    const double d1 = phi.eval_local(c.cell, c.u, 1);
    const double d3 = lap.eval_local(c.cell, c.u, 1);
    out.A_b -= gamma * d3 * static_cast<double>(c.direction);
    out.A_c += std::abs(d1);
    if (std::abs(d1) <= relative_degeneracy * grad_scale) out.degenerate = true;
  }
  // -int dphi/dt over {phi > s}, split at the crossings
  const auto& rule = gauss_legendre(3);
  std::size_t next = 0;
  double integral = 0.0;
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    std::vector<double> cuts{0.0};
    while (next < crossings.size() && crossings[next].cell == cell) {
      cuts.push_back(crossings[next].u);
      ++next;
    }
    cuts.push_back(1.0);
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
      const double a = cuts[seg];
      const double b = cuts[seg + 1];
      if (b <= a) continue;
      if (!(phi.eval_local(cell, 0.5 * (a + b), 0) > s)) continue;
      double local = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        local += rule.weights[q] *
                 dphi_dt.eval_local(cell, a + (b - a) * rule.points[q], 0);
      }
      integral += local * (b - a) * mesh.h();
    }
  }
  out.A = -integral;
  return out;
}

CoareaCoefficients coarea_coefficients(const ObservationData& data,
                                       double gamma, double s, std::size_t k) {
  return coarea_coefficients(data.field(k), data.time_derivative_field(k),
                             gamma, s);
}

double coarea_identity_residual(const CoareaCoefficients& coeffs, double b,
                                double c) {
  const double scale = std::max(std::abs(coeffs.A), coeffs.A_c);
  const double r = std::abs(coeffs.A_b * b + coeffs.A_c * c - coeffs.A);
  return scale > 0.0 ? r / scale : r;
}

IndependenceResult independence_from_rows(const Eigen::Matrix2d& rows,
                                          double cap) {
  IndependenceResult r;
  r.system = rows;
  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(rows);
  const auto sv = svd.singularValues();
  r.condition = sv[1] > 0.0 ? sv[0] / sv[1]
                            : std::numeric_limits<double>::infinity();
  r.independent = r.condition < cap;
  return r;
}

IndependenceResult independence_check(const ObservationData& data, double gamma,
                                      double s, std::size_t k1, std::size_t k2,
                                      double cap) {
  const auto c1 = coarea_coefficients(data, gamma, s, k1);
  const auto c2 = coarea_coefficients(data, gamma, s, k2);
  if (c1.degenerate || c2.degenerate || c1.crossings == 0 || c2.crossings == 0) {
    throw ValidationError("degenerate level set at s = " + std::to_string(s));
  }
  Eigen::Matrix2d rows;
  rows << c1.A_b, c1.A_c, c2.A_b, c2.A_c;
  return independence_from_rows(rows, cap);
}

}  // namespace chid
