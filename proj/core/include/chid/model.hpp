#pragma once

#include <Eigen/Core>

#include "chid/basis.hpp"
#include "chid/parameter_function.hpp"

namespace chid {

/// One Cahn-Hilliard instance: interface parameter, mobility b and double-well
/// potential F. Only f = F' and f' = F'' enter the equations, so F is defined
/// up to an additive constant.
struct ModelParams {
  double gamma;
  ParameterFunction mobility;
  ParameterFunction potential;

  double b(double s) const { return mobility.eval(s, 0); }
  double db(double s) const { return mobility.eval(s, 1); }
  double f(double s) const { return potential.eval(s, 1); }
  double df(double s) const { return potential.eval(s, 2); }

  /// Throws ValidationError if gamma <= 0 or b is not positive on [-1,1].
  void validate() const;

  /// gamma = 0.003, paper-b, paper-F.
  static ModelParams paper();
};

/// Paper initial profile 0.1 sin(2 pi x) - 0.1 sin(4 pi x) + 0.1 sin(12 pi x) + 0.1.
double paper_initial_phase(double x);

/// Free energy  int gamma/2 |phi'|^2 + F(phi) dx.
double energy(const PeriodicField& phi, const ModelParams& params);

/// int phi dx
double mass(const PeriodicField& phi);

/// Invariance transform (gamma/d, d b, f/d + c). F is rebuilt as F/d + c s.
/// Throws ValidationError for d <= 0.
ModelParams scale_params(const ModelParams& params, double d, double c);

/// H2(lo,hi) gram of the cardinal natural spline basis: L2, first and second
/// derivative terms.
struct RegularizerGram {
  KnotGrid grid;
  Eigen::MatrixXd R;
};

/// Throws ValidationError for fewer than 4 knots.
RegularizerGram assemble_param_gram(const KnotGrid& grid);

}  // namespace chid
