#include "chid/parameter_function.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "chid/error.hpp"

namespace chid {

Polynomial::Polynomial(std::vector<double> ascending)
    : coeffs_(std::move(ascending)) {}

double Polynomial::eval(double s, int order) const {
  if (order < 0) throw ValidationError("negative derivative order");
  const auto n = static_cast<int>(coeffs_.size());
  if (order >= n) return 0.0;
  double acc = 0.0;
  for (int k = n - 1; k >= order; --k) {
    double falling = 1.0;
    for (int j = 0; j < order; ++j) falling *= static_cast<double>(k - j);
    acc = acc * s + falling * coeffs_[k];
  }
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial({0.0});
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) {
    d[k - 1] = static_cast<double>(k) * coeffs_[k];
  }
  return Polynomial(std::move(d));
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  std::vector<double> out(std::max(coeffs_.size(), other.coeffs_.size()), 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) out[k] += coeffs_[k];
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) {
    out[k] += other.coeffs_[k];
  }
  return Polynomial(std::move(out));
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (coeffs_.empty() || other.coeffs_.empty()) return Polynomial({0.0});
  std::vector<double> out(coeffs_.size() + other.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < other.coeffs_.size(); ++j) {
      out[i + j] += coeffs_[i] * other.coeffs_[j];
    }
  }
  return Polynomial(std::move(out));
}

Polynomial Polynomial::operator*(double factor) const {
  std::vector<double> out(coeffs_);
  for (auto& c : out) c *= factor;
  return Polynomial(std::move(out));
}

Polynomial Polynomial::pow(unsigned exponent) const {
  Polynomial out({1.0});
  for (unsigned k = 0; k < exponent; ++k) out = out * *this;
  return out;
}

double KnotGrid::knot(std::size_t j) const {
  if (j + 1 == count) return hi;
  return lo + static_cast<double>(j) * spacing();
}

KnotGrid KnotGrid::with_spacing(double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("knot spacing must be positive");
  const double intervals = 2.0 / sigma;
  const double rounded = std::round(intervals);
  if (std::abs(intervals - rounded) > 1e-9 * rounded || rounded < 1.0) {
    throw ValidationError("knot spacing must divide [-1,1] evenly");
  }
  return KnotGrid{-1.0, 1.0, static_cast<std::size_t>(rounded) + 1};
}

NaturalSplineSpace::NaturalSplineSpace(KnotGrid grid) : grid_(grid) {
  const auto n = static_cast<Eigen::Index>(grid_.count);
  if (n < 3) throw ValidationError("natural spline needs at least 3 knots");
  // m_{j-1} + 4 m_j + m_{j+1} = 6/sigma^2 (y_{j-1} - 2 y_j + y_{j+1}),
  // m_0 = m_{n-1} = 0
  const double sigma = grid_.spacing();
  const Eigen::Index ni = n - 2;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(ni, ni);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(ni, n);
  for (Eigen::Index i = 0; i < ni; ++i) {
    a(i, i) = 4.0;
    if (i > 0) a(i, i - 1) = 1.0;
    if (i + 1 < ni) a(i, i + 1) = 1.0;
    const double c = 6.0 / (sigma * sigma);
    d(i, i) = c;
    d(i, i + 1) = -2.0 * c;
    d(i, i + 2) = c;
  }
  moment_map_ = Eigen::MatrixXd::Zero(n, n);
  moment_map_.middleRows(1, ni) = a.ldlt().solve(d);
}

std::pair<std::size_t, double> NaturalSplineSpace::locate(double s) const {
  const double sigma = grid_.spacing();
  const double x = (s - grid_.lo) / sigma;
  const auto last = static_cast<double>(grid_.count - 2);
  const double k = std::clamp(std::floor(x), 0.0, last);
  return {static_cast<std::size_t>(k), x - k};
}

void NaturalSplineSpace::basis(double s, int order,
                               std::span<double> out) const {
  if (out.size() != grid_.count) {
    throw ValidationError("spline basis output has wrong size");
  }
  const auto [k, t] = locate(s);
  const double sigma = grid_.spacing();
  const double v = 1.0 - t;
  double ay = 0.0;
  double by = 0.0;
  double am = 0.0;
  double bm = 0.0;
  switch (order) {
    case 0:
      ay = v;
      by = t;
      am = sigma * sigma / 6.0 * (v * v * v - v);
      bm = sigma * sigma / 6.0 * (t * t * t - t);
      break;
    case 1:
      ay = -1.0 / sigma;
      by = 1.0 / sigma;
      am = sigma / 6.0 * (1.0 - 3.0 * v * v);
      bm = sigma / 6.0 * (3.0 * t * t - 1.0);
      break;
    case 2:
      am = v;
      bm = t;
      break;
    case 3:
      am = -1.0 / sigma;
      bm = 1.0 / sigma;
      break;
    default:
      throw ValidationError("spline derivative order must be 0..3");
  }
  const auto kk = static_cast<Eigen::Index>(k);
  for (std::size_t j = 0; j < grid_.count; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out[j] = am * moment_map_(kk, jj) + bm * moment_map_(kk + 1, jj);
  }
  out[k] += ay;
  out[k + 1] += by;
}

Eigen::VectorXd NaturalSplineSpace::moments(
    const Eigen::VectorXd& values) const {
  return moment_map_ * values;
}

std::shared_ptr<const NaturalSplineSpace> spline_space(const KnotGrid& grid) {
  static std::mutex mutex;
  static std::map<std::tuple<double, double, std::size_t>,
                  std::shared_ptr<const NaturalSplineSpace>>
      cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_tuple(grid.lo, grid.hi, grid.count);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_shared<const NaturalSplineSpace>(grid))
             .first;
  }
  return it->second;
}

NaturalCubicSpline::NaturalCubicSpline(const KnotGrid& grid,
                                       Eigen::VectorXd values)
    : space_(spline_space(grid)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != grid.count) {
    throw ValidationError("spline value count does not match the knot grid");
  }
  moments_ = space_->moments(values_);
}

double NaturalCubicSpline::eval(double s, int order) const {
  const auto [k, t] = space_->locate(s);
  const double sigma = grid().spacing();
  const auto kk = static_cast<Eigen::Index>(k);
  const double y0 = values_[kk];
  const double y1 = values_[kk + 1];
  const double m0 = moments_[kk];
  const double m1 = moments_[kk + 1];
  const double v = 1.0 - t;
  switch (order) {
    case 0:
      return v * y0 + t * y1 +
             sigma * sigma / 6.0 * ((v * v * v - v) * m0 + (t * t * t - t) * m1);
    case 1:
      return (y1 - y0) / sigma +
             sigma / 6.0 * ((1.0 - 3.0 * v * v) * m0 + (3.0 * t * t - 1.0) * m1);
    case 2:
      return v * m0 + t * m1;
    case 3:
      return (m1 - m0) / sigma;
    default:
      return 0.0;
  }
}

ParameterFunction::ParameterFunction(
    std::variant<Polynomial, NaturalCubicSpline> r, std::string id)
    : repr_(std::move(r)), formula_id_(std::move(id)) {}

ParameterFunction ParameterFunction::polynomial(Polynomial p,
                                                std::string formula_id) {
  return ParameterFunction(std::move(p), std::move(formula_id));
}

ParameterFunction ParameterFunction::constant(double value) {
  return ParameterFunction(Polynomial({value}));
}

ParameterFunction ParameterFunction::spline(const KnotGrid& grid,
                                            Eigen::VectorXd values) {
  return ParameterFunction(NaturalCubicSpline(grid, std::move(values)));
}

namespace {

Polynomial paper_potential() {
  // F(s) = (s - 0.99)^2 (s + 0.99)^4
  return Polynomial({-0.99, 1.0}).pow(2) * Polynomial({0.99, 1.0}).pow(4);
}

Polynomial paper_mobility() {
  // b(s) = (1 - s)^4 (1 + s)^2 + 0.2
  return Polynomial({1.0, -1.0}).pow(4) * Polynomial({1.0, 1.0}).pow(2) +
         Polynomial({0.2});
}

}  // namespace

bool ParameterFunction::in_catalog(std::string_view id) {
  return id == "paper-F" || id == "paper-b" || id == "zero";
}

ParameterFunction ParameterFunction::from_catalog(std::string_view id) {
  if (id == "paper-F") {
    return polynomial(paper_potential(), std::string(id));
  }
  if (id == "paper-b") {
    auto p = polynomial(paper_mobility(), std::string(id));
    p.lower_bound_hint = 0.2;
    return p;
  }
  if (id == "zero") return polynomial(Polynomial({0.0}), std::string(id));
  throw ValidationError("unknown parameter function id '" + std::string(id) +
                        "'");
}

bool ParameterFunction::is_spline() const {
  return std::holds_alternative<NaturalCubicSpline>(repr_);
}

const Polynomial* ParameterFunction::as_polynomial() const {
  return std::get_if<Polynomial>(&repr_);
}

const NaturalCubicSpline* ParameterFunction::as_spline() const {
  return std::get_if<NaturalCubicSpline>(&repr_);
}

double ParameterFunction::eval(double s, int order) const {
  return std::visit([&](const auto& r) { return r.eval(s, order); }, repr_);
}

ParameterFunction ParameterFunction::affine(double factor, double slope,
                                            double offset) const {
  if (const auto* p = as_polynomial()) {
    auto q = *p * factor;
    if (slope != 0.0 || offset != 0.0) q = q + Polynomial({offset, slope});
    return polynomial(std::move(q));
  }
  // natural splines are closed under adding affine functions (zero curvature)
  const auto& sp = *as_spline();
  Eigen::VectorXd v = factor * sp.values();
  if (slope != 0.0 || offset != 0.0) {
    for (std::size_t j = 0; j < sp.grid().count; ++j) {
      v[static_cast<Eigen::Index>(j)] += slope * sp.grid().knot(j) + offset;
    }
  }
  return spline(sp.grid(), std::move(v));
}

double eval_param(const ParameterFunction& p, double s, int order) {
  if (order < 0 || (p.is_spline() && order > 3)) {
    throw ValidationError("derivative order " + std::to_string(order) +
                          " not supported by this representation");
  }
  return p.eval(s, order);
}

double sampled_minimum(const ParameterFunction& p, double lo, double hi,
                       std::size_t samples) {
  double m = p.eval(lo);
  for (std::size_t i = 1; i < samples; ++i) {
    const double s =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    m = std::min(m, p.eval(s));
  }
  return m;
}

ParameterFunction fit_spline(const KnotGrid& grid,
                             const std::function<double(double)>& fn) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.count));
  for (std::size_t j = 0; j < grid.count; ++j) {
    v[static_cast<Eigen::Index>(j)] = fn(grid.knot(j));
  }
  return ParameterFunction::spline(grid, std::move(v));
}

}  // namespace chid
