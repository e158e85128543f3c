#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <random>

#include "chid/diagnostics.hpp"
#include "chid/error.hpp"
#include "chid/postprocess.hpp"
#include "chid/problem.hpp"
#include "chid/tikhonov.hpp"
#include "fixtures.hpp"

namespace chid {

void PrintTo(ProblemKind kind, std::ostream* os) { *os << to_string(kind); }

namespace {

using testing::sine;
using testing::synthetic_data;

AssembledProblem dense_problem(const Eigen::MatrixXd& T, const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& R) {
  AssembledProblem p;
  p.blocks.push_back(TimeBlock{0.0, 1, T, y});
  p.M = GramFactor::identity(T.rows());
  p.R = R;
  return p;
}

std::vector<double> half_decades(int count) {
  std::vector<double> grid;
  for (int k = 0; k < count; ++k) grid.push_back(std::pow(10.0, -0.5 * k));
  return grid;
}

TEST(ProblemKind, ParseAndPrint) {
  for (auto kind : {ProblemKind::identify_f, ProblemKind::identify_b, ProblemKind::identify_joint}) {
    EXPECT_EQ(parse_problem_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_problem_kind("identify-g"), ValidationError);
}

TEST(Assembly, ShapesForEachKind) {
  const ObservationData& data = testing::short_paper_data();
  const ModelParams p = ModelParams::paper();
  const std::vector<std::size_t> idx{5, 10};
  const auto f = assemble_identify_f(data, p.gamma, p.mobility, idx);
  EXPECT_EQ(f.cols(), 21);
  EXPECT_EQ(f.blocks.size(), 2u);
  EXPECT_EQ(f.rows(), 40);
  const auto b = assemble_identify_b(data, p.gamma, p.potential, idx);
  EXPECT_EQ(b.cols(), 21);
  const auto j = assemble_identify_joint(data, p.gamma, idx);
  EXPECT_EQ(j.cols(), 42);
  EXPECT_TRUE(j.warnings.empty());
}

TEST(Assembly, ErrorPaths) {
  const ObservationData& data = testing::short_paper_data();
  const ModelParams p = ModelParams::paper();
  EXPECT_THROW(assemble_identify_f(data, p.gamma, p.mobility, {}), ValidationError);
  const std::vector<std::size_t> first{0};
  EXPECT_THROW(assemble_identify_f(data, p.gamma, p.mobility, first), ValidationError);
  const auto wild = synthetic_data(16, 0.01, 3, [](double x, double) { return 1.5 * sine(x); });
  const std::vector<std::size_t> one{1};
  EXPECT_THROW(assemble_identify_f(wild, p.gamma, p.mobility, one), ValidationError);
}

TEST(Assembly, ConstantDataGivesZeroBlocks) {
  const auto flat = synthetic_data(16, 0.01, 3, [](double, double) { return 0.2; });
  const ModelParams p = ModelParams::paper();
  const std::vector<std::size_t> idx{2};
  EXPECT_NEAR(assemble_identify_f(flat, p.gamma, p.mobility, idx).blocks[0].T.cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR(assemble_identify_b(flat, p.gamma, p.potential, idx).blocks[0].T.cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Assembly, SingleInstantJointWarnsAndIsRankDeficient) {
  const ObservationData& data = testing::short_paper_data();
  const std::vector<std::size_t> idx{10};
  const auto j = assemble_identify_joint(data, 0.003, idx);
  EXPECT_FALSE(j.warnings.empty());
  const NormalEquations ne = normal_equations(j);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ne.N);
  const auto& sv = svd.singularValues();
  EXPECT_LT(sv[sv.size() - 1], 1e-10 * sv[0]);
}

TEST(Assembly, ThreadCountDoesNotChangeResult) {
  const ObservationData& data = testing::short_paper_data();
  const ModelParams p = ModelParams::paper();
  const auto idx = data.window(0.0, 8e-4);
  AssemblyOptions serial;
  AssemblyOptions threaded;
  threaded.threads = 4;
  const auto a = assemble_identify_joint(data, p.gamma, idx, serial);
  const auto b = assemble_identify_joint(data, p.gamma, idx, threaded);
  EXPECT_EQ(a.stacked_T(), b.stacked_T());
  EXPECT_EQ(a.stacked_y(), b.stacked_y());
}

class Consistency : public ::testing::TestWithParam<ProblemKind> {};

// Weighted residual of the true parameters shrinks under refinement.
TEST_P(Consistency, ResidualOfTruthDecreases) {
  const ModelParams p = ModelParams::paper();
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n : {100u, 200u, 400u}) {
    const ObservationData& data = testing::short_paper_data(n, 1e-3);
    const auto idx = data.window(2e-4, 1e-3);
    const auto problem = assemble_problem(GetParam(), data, p, idx);
    const Eigen::VectorXd x = truth_coefficients(GetParam(), p, problem.grid);
    double ynorm = 0.0;
    for (const auto& b : problem.blocks) ynorm += std::pow(problem.M->dual_norm(b.y), 2);
    const double rel = problem.residual_norm(x) / std::sqrt(ynorm);
    EXPECT_LT(rel, previous) << "n = " << n;
    previous = rel;
  }
  EXPECT_LT(previous, 0.1);
}

INSTANTIATE_TEST_SUITE_P(Kinds, Consistency,
                         ::testing::Values(ProblemKind::identify_f, ProblemKind::identify_b,
                                           ProblemKind::identify_joint),
                         [](const auto& info) {
                           std::string name = to_string(info.param);
                           std::erase(name, '-');
                           return name;
                         });

TEST(Tikhonov, ScalarToy) {
  const auto p = dense_problem(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1),
                               Eigen::MatrixXd::Ones(1, 1));
  for (double alpha : {1.0, 0.1, 1e-6}) {
    EXPECT_NEAR(tikhonov_solve(p, alpha).coefficients[0], 1.0 / (1.0 + alpha), 1e-14);
    EXPECT_NEAR(tikhonov_solve_direct(p, alpha).coefficients[0], 1.0 / (1.0 + alpha), 1e-14);
  }
}

TEST(Tikhonov, ZeroDataGivesZero) {
  const ObservationData& data = testing::short_paper_data();
  const ModelParams p = ModelParams::paper();
  auto problem = assemble_problem(ProblemKind::identify_f, data, p, data.window(0.0, 8e-4));
  for (auto& b : problem.blocks) b.y.setZero();
  for (double alpha : {1e-2, 1e-8}) {
    EXPECT_EQ(tikhonov_solve(problem, alpha).coefficients.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Tikhonov, RejectsNonPositiveAlpha) {
  const auto p = dense_problem(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1),
                               Eigen::MatrixXd::Ones(1, 1));
  EXPECT_THROW(tikhonov_solve(p, 0.0), ValidationError);
  EXPECT_THROW(tikhonov_solve(p, -1.0), ValidationError);
}

TEST(Tikhonov, CgMatchesDirectOnAssembledProblems) {
  const ObservationData& data = testing::short_paper_data(100, 8e-3);
  const ModelParams p = ModelParams::paper();
  const auto idx = data.window(0.0, 8e-3);
  for (auto kind : {ProblemKind::identify_f, ProblemKind::identify_b, ProblemKind::identify_joint}) {
    const auto problem = assemble_problem(kind, data, p, idx);
    for (double alpha : {1e-4, 1e-8, 1e-10}) {
      const auto cg = tikhonov_solve(problem, alpha);
      const auto direct = tikhonov_solve_direct(problem, alpha);
      const double rel = (cg.coefficients - direct.coefficients).norm() / direct.coefficients.norm();
      EXPECT_LE(rel, 1e-10) << to_string(kind) << " alpha " << alpha;
    }
  }
}

TEST(LCurve, MonotoneNormsOnSweep) {
  const ObservationData& data = testing::short_paper_data(100, 8e-3);
  const ModelParams p = ModelParams::paper();
  const auto problem = assemble_problem(ProblemKind::identify_b, data, p, data.window(0.0, 8e-3));
  const auto lc = lcurve_select(problem, default_alpha_grid());
  for (std::size_t i = 1; i < lc.points.size(); ++i) {
    EXPECT_LE(lc.points[i].residual_norm, lc.points[i - 1].residual_norm * (1 + 1e-12));
    EXPECT_GE(lc.points[i].solution_norm, lc.points[i - 1].solution_norm * (1 - 1e-12));
  }
  EXPECT_EQ(lc.solutions.size(), lc.points.size());
  EXPECT_EQ(lc.points[lc.index].alpha, lc.alpha_star);
}

TEST(LCurve, GridValidation) {
  const auto p = dense_problem(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(2),
                               Eigen::MatrixXd::Identity(2, 2));
  EXPECT_THROW(lcurve_select(p, {1.0, 0.1, 0.01}), ValidationError);
  auto increasing = half_decades(12);
  std::reverse(increasing.begin(), increasing.end());
  EXPECT_THROW(lcurve_select(p, increasing), ValidationError);
  std::vector<double> narrow;
  for (int k = 0; k < 12; ++k) narrow.push_back(std::pow(10.0, -0.1 * k));
  EXPECT_THROW(lcurve_select(p, narrow), ValidationError);
}

// Diagonal toy: singular values 1 .. 1e-6, each with multiplicity 10, noise sd 1e-3.
TEST(LCurve, DiagonalToyMatchesBruteForce) {
  const int copies = 10;
  const int n = 7 * copies;
  const double noise = 1e-3;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) T(i, i) = std::pow(10.0, -(i / copies));
  const Eigen::VectorXd x_true = Eigen::VectorXd::Ones(n);
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> normal(0.0, noise);
  Eigen::VectorXd y = T * x_true;
  for (auto& v : y) v += normal(gen);
  const auto p = dense_problem(T, y, Eigen::MatrixXd::Identity(n, n));
  const auto grid = half_decades(25);
  const auto lc = lcurve_select(p, grid);
  std::size_t best = 0;
  std::size_t expected_best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  double best_expected = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double err = (lc.solutions[i].coefficients - x_true).norm();
    if (err < best_err) {
      best_err = err;
      best = i;
    }
    double expected = 0.0;
    for (int j = 0; j < n; ++j) {
      const double s2 = T(j, j) * T(j, j);
      const double filter = s2 / (s2 + grid[i]);
      expected += std::pow(1.0 - filter, 2) + filter * filter * noise * noise / s2;
    }
    if (expected < best_expected) {
      best_expected = expected;
      expected_best = i;
    }
  }
  EXPECT_LE(std::abs(static_cast<long>(lc.index) - static_cast<long>(best)), 1)
      << "selected alpha " << lc.alpha_star << " brute force " << grid[best];
  EXPECT_LE(std::abs(static_cast<long>(lc.index) - static_cast<long>(expected_best)), 1);
}

TEST(RecoverFprime, Examples) {
  const KnotGrid grid = KnotGrid::with_spacing(0.1);
  const ParameterFunction b = fit_spline(grid, [](double s) { return 1.2 + 0.3 * s; });
  const ParameterFunction one = recover_fprime(b, b);
  for (double s : {-0.95, 0.0, 0.42}) EXPECT_NEAR(one.eval(s), 1.0, 1e-12);
  const ParameterFunction c = fit_spline(grid, [](double s) { return 2.4 + 0.6 * s; });
  EXPECT_NEAR(recover_fprime(c, b).eval(0.0), 2.0, 1e-12);
  const ParameterFunction neg = fit_spline(grid, [](double s) { return s; });
  EXPECT_THROW(recover_fprime(c, neg), ValidationError);
}

TEST(RangeRestrictedError, Examples) {
  const IntervalSet range{{-0.5, 0.2}, {0.4, 0.9}};
  const auto truth = [](double s) { return 1.0 + s * s; };
  EXPECT_EQ(range_restricted_error(truth, truth, range), 0.0);
  EXPECT_NEAR(range_restricted_error([](double) { return 2.0; }, [](double) { return 1.0; }, range),
              1.0, 1e-14);
  EXPECT_NEAR(range_restricted_error([&](double s) { return 2.0 * truth(s); }, truth, range), 1.0,
              1e-14);
  EXPECT_THROW(range_restricted_error(truth, truth, IntervalSet{}), ValidationError);
}

TEST(PerturbationProbe, ZeroDeltaIsExact) {
  const ObservationData& data = testing::short_paper_data();
  const ModelParams p = ModelParams::paper();
  const auto idx = data.window(0.0, 8e-4);
  const std::vector<double> deltas{0.0};
  for (auto kind : {ProblemKind::identify_f, ProblemKind::identify_b, ProblemKind::identify_joint}) {
    const auto probe = perturbation_scaling_probe(kind, data, p, idx, deltas,
                                                  truth_coefficients(kind, p, KnotGrid{}), 5);
    EXPECT_EQ(probe.operator_perturbation[0], 0.0);
    EXPECT_EQ(probe.data_perturbation[0], 0.0);
  }
}

TEST(PerturbationProbe, LinearScaling) {
  const ObservationData& data = testing::short_paper_data(100, 8e-3);
  const ModelParams p = ModelParams::paper();
  const auto idx = data.window(0.0, 8e-3);
  const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
  const auto probe = perturbation_scaling_probe(
      ProblemKind::identify_f, data, p, idx, deltas,
      truth_coefficients(ProblemKind::identify_f, p, KnotGrid{}), 5);
  EXPECT_NEAR(probe.slope, 1.0, 0.2);
}

TEST(LoglogSlope, Power) {
  const std::vector<double> x{1.0, 10.0, 100.0};
  const std::vector<double> y{3.0, 300.0, 30000.0};
  EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
}

}  // namespace
}  // namespace chid
