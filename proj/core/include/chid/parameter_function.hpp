#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace chid {

/// Dense polynomial with ascending coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> ascending);

  const std::vector<double>& coefficients() const { return coeffs_; }
  std::size_t degree() const { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }

  double eval(double s, int order = 0) const;
  Polynomial derivative() const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double factor) const;
  Polynomial pow(unsigned exponent) const;

  bool operator==(const Polynomial&) const = default;

 private:
  std::vector<double> coeffs_;
};

/// Uniform knots on [lo, hi].
struct KnotGrid {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t count = 21;

  double spacing() const { return (hi - lo) / static_cast<double>(count - 1); }
  double knot(std::size_t j) const;

  /// Knots on [-1,1] with the given spacing; throws unless 2/sigma is integral.
  static KnotGrid with_spacing(double sigma);

  bool operator==(const KnotGrid&) const = default;
};

/// Cardinal natural cubic splines theta_j on a knot grid: theta_j(s_i) =
/// delta_ij with vanishing second derivative at both ends. Outside the grid
/// each function continues as the cubic of its end interval.
class NaturalSplineSpace {
 public:
  explicit NaturalSplineSpace(KnotGrid grid);

  const KnotGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.count; }

  /// theta_j^{(order)}(s) for all j, order 0..3.
  void basis(double s, int order, std::span<double> out) const;
  /// Second derivatives at the knots of the interpolant of `values`.
  Eigen::VectorXd moments(const Eigen::VectorXd& values) const;
  /// Interval index and local coordinate (unclamped) for s.
  std::pair<std::size_t, double> locate(double s) const;

 private:
  KnotGrid grid_;
  Eigen::MatrixXd moment_map_;
};

/// Shared, cached spline space for a grid.
std::shared_ptr<const NaturalSplineSpace> spline_space(const KnotGrid& grid);

/// Natural cubic spline interpolating nodal values.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(const KnotGrid& grid, Eigen::VectorXd values);

  const KnotGrid& grid() const { return space_->grid(); }
  const Eigen::VectorXd& values() const { return values_; }
  double eval(double s, int order = 0) const;

 private:
  std::shared_ptr<const NaturalSplineSpace> space_;
  Eigen::VectorXd values_;
  Eigen::VectorXd moments_;
};

/// Scalar function of the phase value: a closed-form polynomial (optionally
/// registered under a catalog id) or a natural cubic spline on [-1,1].
class ParameterFunction {
 public:
  static ParameterFunction polynomial(Polynomial p, std::string formula_id = {});
  static ParameterFunction constant(double value);
  static ParameterFunction spline(const KnotGrid& grid, Eigen::VectorXd values);
  /// Built-in closed forms: "paper-F", "paper-b", "zero". Throws
  /// ValidationError for unknown ids.
  static ParameterFunction from_catalog(std::string_view id);
  static bool in_catalog(std::string_view id);

  bool is_spline() const;
  const Polynomial* as_polynomial() const;
  const NaturalCubicSpline* as_spline() const;
  const std::string& formula_id() const { return formula_id_; }

  double eval(double s, int order = 0) const;

  /// factor * p(s) + slope * s + offset
  ParameterFunction affine(double factor, double slope = 0.0,
                           double offset = 0.0) const;

  std::optional<double> lower_bound_hint;

 private:
  std::variant<Polynomial, NaturalCubicSpline> repr_;
  std::string formula_id_;

  explicit ParameterFunction(std::variant<Polynomial, NaturalCubicSpline> r,
                             std::string id = {});
};

/// Throws ValidationError for orders the representation cannot provide.
double eval_param(const ParameterFunction& p, double s, int order);

/// Minimum of p over `samples` equispaced points of [lo, hi].
double sampled_minimum(const ParameterFunction& p, double lo = -1.0,
                       double hi = 1.0, std::size_t samples = 1000);

/// Interpolates fn at the knots of `grid`.
ParameterFunction fit_spline(const KnotGrid& grid,
                             const std::function<double(double)>& fn);

}  // namespace chid
