#include <gtest/gtest.h>

#include <Eigen/LU>
#include <random>

#include "chid/basis.hpp"
#include "chid/error.hpp"
#include "chid/gram.hpp"
#include "chid/mesh.hpp"
#include "fixtures.hpp"

namespace chid {

void PrintTo(BasisKind kind, std::ostream* os) {
  *os << (kind == BasisKind::quadratic_fe ? "P2" : "Spline");
}

namespace {

using testing::kPi;
using testing::sine;

const double kDualSine = std::sqrt(0.5) / std::sqrt(1.0 + 4.0 * kPi * kPi);

TEST(Mesh, SpacingMatchesCellCount) {
  EXPECT_DOUBLE_EQ(build_mesh(200).h(), 5e-3);
  EXPECT_DOUBLE_EQ(build_mesh(100).h(), 1e-2);
  EXPECT_DOUBLE_EQ(build_mesh(4).h(), 0.25);
}

TEST(Mesh, RejectsTooFewCells) {
  EXPECT_THROW(build_mesh(3), ValidationError);
  EXPECT_THROW(build_mesh(0), ValidationError);
}

TEST(Mesh, WrapsPeriodically) {
  const PeriodicMesh mesh(10);
  EXPECT_EQ(mesh.wrap(-1), 9u);
  EXPECT_EQ(mesh.wrap(10), 0u);
  EXPECT_DOUBLE_EQ(PeriodicMesh::wrap_point(1.25), 0.25);
  EXPECT_DOUBLE_EQ(PeriodicMesh::wrap_point(-0.25), 0.75);
}

class BothBases : public ::testing::TestWithParam<BasisKind> {};

TEST_P(BothBases, ConstantFieldHasZeroDerivatives) {
  const SpatialBasis basis(GetParam(), PeriodicMesh(16));
  const PeriodicField f = interpolate(basis, [](double) { return 0.7; });
  for (double x : {0.0, 0.13, 0.5, 0.99}) {
    EXPECT_NEAR(eval_field(f, x, 0), 0.7, 1e-14);
    for (int order = 1; order <= basis.max_order(); ++order) {
      EXPECT_NEAR(eval_field(f, x, order), 0.0, 1e-10) << "order " << order;
    }
  }
}

TEST_P(BothBases, OrderBeyondBasisThrows) {
  const SpatialBasis basis(GetParam(), PeriodicMesh(16));
  const PeriodicField f = interpolate(basis, sine);
  EXPECT_THROW(eval_field(f, 0.3, basis.max_order() + 1), ValidationError);
}

TEST_P(BothBases, PeriodicEvaluationIsBitwise) {
  const SpatialBasis basis(GetParam(), PeriodicMesh(32));
  const PeriodicField f = interpolate(basis, [](double x) { return sine(x) + 0.3 * std::cos(6 * kPi * x); });
  for (double x : {0.0, 0.125, 0.375, 0.8125}) {
    for (int order = 0; order <= basis.max_order(); ++order) {
      EXPECT_EQ(eval_field(f, x, order), eval_field(f, x + 1.0, order));
      EXPECT_EQ(eval_field(f, x, order), eval_field(f, x - 1.0, order));
    }
  }
}

TEST_P(BothBases, GramOrderingAndConstants) {
  const SpatialBasis basis(GetParam(), PeriodicMesh(12));
  const GramPair g = assemble_grams(basis);
  const auto n = static_cast<Eigen::Index>(basis.dof_count());
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd v(n);
    for (auto& x : v) x = normal(gen);
    const double h1 = v.dot(g.h1 * v);
    const double l2 = v.dot(g.l2 * v);
    EXPECT_GE(l2, 0.0);
    EXPECT_GT(h1, l2);
  }
  const Eigen::VectorXd ones = interpolate(basis, [](double) { return 1.0; }).coeffs;
  EXPECT_NEAR(ones.dot(g.h1 * ones), ones.dot(g.l2 * ones), 1e-11);
  EXPECT_NEAR(ones.dot(g.l2 * ones), 1.0, 1e-13);
}

TEST_P(BothBases, DualNormBasics) {
  const SpatialBasis basis(GetParam(), PeriodicMesh(10));
  const GramPair g = assemble_grams(basis);
  const auto n = static_cast<Eigen::Index>(basis.dof_count());
  EXPECT_EQ(dual_norm_hm1(Eigen::VectorXd::Zero(n), g), 0.0);
  const Eigen::MatrixXd inv = Eigen::MatrixXd(g.h1).inverse();
  for (Eigen::Index i : {Eigen::Index{0}, n / 2, n - 1}) {
    EXPECT_NEAR(dual_norm_hm1(Eigen::VectorXd::Unit(n, i), g), std::sqrt(inv(i, i)), 1e-12);
  }
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
  EXPECT_NEAR(dual_norm_hm1(-3.5 * y, g), 3.5 * dual_norm_hm1(y, g), 1e-12);
}

TEST_P(BothBases, DualNormOfSineConverges) {
  double previous = 1.0;
  for (std::size_t n : {25u, 50u, 100u, 200u, 400u}) {
    const SpatialBasis basis(GetParam(), PeriodicMesh(n));
    const double err = std::abs(
        dual_norm_hm1(load_vector(basis, sine, 8), assemble_grams(basis)) - kDualSine);
    // the spline error reaches round-off before n = 400
    EXPECT_TRUE(err < previous || err < 1e-12) << "n = " << n << " error " << err;
    previous = err;
  }
  EXPECT_LE(previous, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Kinds, BothBases,
                         ::testing::Values(BasisKind::quadratic_fe,
                                           BasisKind::periodic_cubic_spline),
                         [](const auto& info) {
                           return info.param == BasisKind::quadratic_fe ? "P2" : "Spline";
                         });

TEST(CubicSpline, InterpolatesAtKnots) {
  const PeriodicMesh mesh(20);
  const auto profile = [](double x) { return x * (1.0 - x); };
  Eigen::VectorXd nodal(20);
  for (Eigen::Index i = 0; i < 20; ++i) nodal[i] = profile(mesh.node(static_cast<std::size_t>(i)));
  const PeriodicField f = spline_from_nodal_values(mesh, nodal);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(f.eval(mesh.node(i)), nodal[static_cast<Eigen::Index>(i)], 1e-14);
}

TEST(CubicSpline, SecondDerivativeOfSine) {
  const SpatialBasis basis(BasisKind::periodic_cubic_spline, PeriodicMesh(100));
  const PeriodicField f = interpolate(basis, sine);
  const double expected = -4.0 * kPi * kPi;
  EXPECT_NEAR(f.eval(0.25, 2), expected, 0.01 * std::abs(expected));
}

TEST(CubicSpline, ThirdDerivativeIsPiecewiseConstant) {
  const SpatialBasis basis(BasisKind::periodic_cubic_spline, PeriodicMesh(50));
  const PeriodicField f = interpolate(basis, sine);
  const double h = basis.mesh().h();
  EXPECT_DOUBLE_EQ(f.eval(3.2 * h, 3), f.eval(3.7 * h, 3));
}

TEST(SobolevNorm, SineModes) {
  const SpatialBasis basis(BasisKind::periodic_cubic_spline, PeriodicMesh(200));
  const PeriodicField f = interpolate(basis, sine);
  const double k2 = 4.0 * kPi * kPi;
  EXPECT_NEAR(sobolev_norm_squared(f, 0), 0.5, 1e-8);
  EXPECT_NEAR(sobolev_norm_squared(f, 1), 0.5 * (1 + k2), 1e-5);
}

}  // namespace
}  // namespace chid
