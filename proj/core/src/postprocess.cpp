#include "chid/postprocess.hpp"

#include <cmath>

#include "chid/error.hpp"
#include "chid/quadrature.hpp"

namespace chid {

ParameterFunction solution_function(const KnotGrid& grid,
                                    const Eigen::VectorXd& coefficients) {
  if (coefficients.size() != static_cast<Eigen::Index>(grid.count)) {
    throw ValidationError("coefficient count does not match the knot grid");
  }
  return ParameterFunction::spline(grid, coefficients);
}

ParameterFunction recover_fprime(const ParameterFunction& c,
                                 const ParameterFunction& b, double floor) {
  const KnotGrid grid = c.is_spline() ? c.as_spline()->grid() : KnotGrid{};
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.count));
  for (std::size_t j = 0; j < grid.count; ++j) {
    const double s = grid.knot(j);
    const double bj = b.eval(s, 0);
    if (!(bj >= floor)) {
      throw ValidationError("mobility " + std::to_string(bj) + " at s = " +
                            std::to_string(s) + " is below the positivity floor");
    }
    v(static_cast<Eigen::Index>(j)) = c.eval(s, 0) / bj;
  }
  return ParameterFunction::spline(grid, v);
}

double range_restricted_error(const std::function<double(double)>& reconstruction,
                              const std::function<double(double)>& truth,
                              const IntervalSet& range) {
  if (!(range.measure() > 0.0)) {
    throw ValidationError("range for the error measure is empty");
  }
  const auto& rule = gauss_legendre(8);
  double err = 0.0;
  double ref = 0.0;
  for (const auto& iv : range.intervals()) {
    if (!(iv.length() > 0.0)) continue;
    const auto pieces =
        static_cast<std::size_t>(std::ceil(iv.length() / 0.005));
    const double h = iv.length() / static_cast<double>(pieces);
    for (std::size_t p = 0; p < pieces; ++p) {
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double s = iv.lo + h * (static_cast<double>(p) + rule.points[q]);
        const double t = truth(s);
        const double d = reconstruction(s) - t;
        err += rule.weights[q] * h * d * d;
        ref += rule.weights[q] * h * t * t;
      }
    }
  }
  return ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err);
}

Eigen::VectorXd truth_coefficients(ProblemKind kind, const ModelParams& params,
                                   const KnotGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.count);
  Eigen::VectorXd b(n);
  Eigen::VectorXd c(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = grid.knot(static_cast<std::size_t>(j));
    b(j) = params.b(s);
    c(j) = params.b(s) * params.df(s);
  }
  switch (kind) {
    case ProblemKind::identify_f: return c;
    case ProblemKind::identify_b: return b;
    case ProblemKind::identify_joint: {
      Eigen::VectorXd x(2 * n);
      x << b, c;
      return x;
    }
  }
  return {};
}

AssembledProblem assemble_problem(ProblemKind kind, const ObservationData& data,
                                  const ModelParams& params,
                                  std::span<const std::size_t> indices,
                                  const AssemblyOptions& options) {
  switch (kind) {
    case ProblemKind::identify_f:
      return assemble_identify_f(data, params.gamma, params.mobility, indices,
                                 options);
    case ProblemKind::identify_b:
      return assemble_identify_b(data, params.gamma, params.potential, indices,
                                 options);
    case ProblemKind::identify_joint:
      return assemble_identify_joint(data, params.gamma, indices, options);
  }
  throw ValidationError("unknown problem kind");
}

PerturbationProbe perturbation_scaling_probe(
    ProblemKind kind, const ObservationData& exact, const ModelParams& params,
    std::span<const std::size_t> indices, std::span<const double> deltas,
    const Eigen::VectorXd& x, std::uint64_t seed,
    const AssemblyOptions& options) {
  const AssembledProblem ref =
      assemble_problem(kind, exact, params, indices, options);
  PerturbationProbe out;
  for (double delta : deltas) {
    const ObservationData noisy = inject_noise(exact, delta, seed);
    const AssembledProblem pert =
        assemble_problem(kind, noisy, params, indices, options);
    double op = 0.0;
    double dy = 0.0;
    for (std::size_t b = 0; b < ref.blocks.size(); ++b) {
      const double o =
          ref.M->dual_norm((pert.blocks[b].T - ref.blocks[b].T) * x);
      const double d = ref.M->dual_norm(pert.blocks[b].y - ref.blocks[b].y);
      op += o * o;
      dy += d * d;
    }
    out.deltas.push_back(delta);
    out.operator_perturbation.push_back(std::sqrt(op));
    out.data_perturbation.push_back(std::sqrt(dy));
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < out.deltas.size(); ++i) {
    if (out.deltas[i] > 0.0 && out.operator_perturbation[i] > 0.0) {
      xs.push_back(out.deltas[i]);
      ys.push_back(out.operator_perturbation[i]);
    }
  }
  out.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("slope fit needs at least two matching samples");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw ValidationError("slope fit needs distinct abscissae");
  return (n * sxy - sx * sy) / den;
}

}  // namespace chid
