#include "chid/model.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "chid/error.hpp"
#include "chid/quadrature.hpp"

namespace chid {
namespace {

// F(phi) is a degree-6 polynomial of at most a cubic: degree 18 needs 10 points
constexpr int kEnergyPoints = 10;

}  // namespace

void ModelParams::validate() const {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  const double bmin = sampled_minimum(mobility);
  if (!(bmin > 0.0)) {
    throw ValidationError("mobility must be strictly positive on [-1,1] (min " +
                          std::to_string(bmin) + ")");
  }
}

ModelParams ModelParams::paper() {
  return ModelParams{0.003, ParameterFunction::from_catalog("paper-b"),
                     ParameterFunction::from_catalog("paper-F")};
}

double paper_initial_phase(double x) {
  constexpr double pi = std::numbers::pi;
  return 0.1 * std::sin(2.0 * pi * x) - 0.1 * std::sin(4.0 * pi * x) +
         0.1 * std::sin(12.0 * pi * x) + 0.1;
}

double energy(const PeriodicField& phi, const ModelParams& params) {
  const auto& rule = gauss_legendre(kEnergyPoints);
  const auto& mesh = phi.basis.mesh();
  double total = 0.0;
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    double local = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double u = rule.points[q];
      const double v = phi.eval_local(cell, u, 0);
      const double g = phi.eval_local(cell, u, 1);
      local += rule.weights[q] *
               (0.5 * params.gamma * g * g + params.potential.eval(v, 0));
    }
    total += local * mesh.h();
  }
  return total;
}

double mass(const PeriodicField& phi) {
  const auto& rule = gauss_legendre(3);
  const auto& mesh = phi.basis.mesh();
  double total = 0.0;
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    double local = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      local += rule.weights[q] * phi.eval_local(cell, rule.points[q], 0);
    }
    total += local * mesh.h();
  }
  return total;
}

ModelParams scale_params(const ModelParams& params, double d, double c) {
  if (!(d > 0.0)) throw ValidationError("scaling factor d must be positive");
  ModelParams out{params.gamma / d, params.mobility.affine(d),
                  params.potential.affine(1.0 / d, c)};
  if (d == 1.0 && c == 0.0) {
    out.mobility = params.mobility;
    out.potential = params.potential;
  }
  return out;
}

RegularizerGram assemble_param_gram(const KnotGrid& grid) {
  if (grid.count < 4) {
    throw ValidationError("parameter grid needs at least 4 knots");
  }
  const auto space = spline_space(grid);
  const auto n = static_cast<Eigen::Index>(grid.count);
  const auto& rule = gauss_legendre(4);
  const double sigma = grid.spacing();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> th(grid.count);
  for (std::size_t k = 0; k + 1 < grid.count; ++k) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double s = grid.knot(k) + rule.points[q] * sigma;
      const double w = rule.weights[q] * sigma;
      for (int order = 0; order <= 2; ++order) {
        space->basis(s, order, th);
        const Eigen::Map<const Eigen::VectorXd> v(th.data(), n);
        r.noalias() += w * v * v.transpose();
      }
    }
  }
  // symmetrize against rounding in the rank-one updates
  r = 0.5 * (r + r.transpose()).eval();
  return RegularizerGram{grid, std::move(r)};
}

}  // namespace chid
