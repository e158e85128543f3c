// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "chid/diagnostics.hpp"
#include "chid/error.hpp"
#include "chid/forward.hpp"
#include "chid/gram.hpp"
#include "chid/model.hpp"
#include "chid/observation.hpp"
#include "chid/postprocess.hpp"
#include "chid/problem.hpp"
#include "chid/tikhonov.hpp"

namespace {

using namespace chid;

constexpr double kPi = std::numbers::pi;
constexpr double kTau = 2e-5;
constexpr double kT = 0.02;
constexpr double kWindowEnd = 0.008;
constexpr std::size_t kCells = 200;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.passed) ++failures;
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", out.passed ? "PASS" : "FAIL", id, name,
              out.detail.c_str(), secs);
  std::fflush(stdout);
}

struct PaperRun {
  ModelParams params = ModelParams::paper();
  Trajectory traj;
  ObservationData data;
  std::vector<std::size_t> window;
};

Trajectory paper_trajectory(std::size_t cells, double T) {
  const ForwardSolver solver(PeriodicMesh(cells), ModelParams::paper());
  return solver.simulate(interpolate(solver.basis(), paper_initial_phase), T, kTau);
}

const PeriodicField& paper_phi0() {
  static const PeriodicField phi0 =
      interpolate(SpatialBasis(BasisKind::quadratic_fe, PeriodicMesh(kCells)), paper_initial_phase);
  return phi0;
}

const PaperRun& paper_run() {
  static const PaperRun run = [] {
    Trajectory traj = paper_trajectory(kCells, kT);
    ObservationData data = restrict_to_data_grid(traj, 2);
    auto window = data.window(0.0, kWindowEnd);
    return PaperRun{ModelParams::paper(), std::move(traj), std::move(data), std::move(window)};
  }();
  return run;
}

std::vector<std::size_t> thin(const std::vector<std::size_t>& idx, std::size_t count) {
  if (idx.size() <= count) return idx;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(idx[i * (idx.size() - 1) / (count - 1)]);
  }
  return out;
}

double sine(double x) { return std::sin(2.0 * kPi * x); }

struct CoareaStats {
  double worst = 0.0;
  double mean = 0.0;
  std::size_t samples = 0;
};

// Nine interior levels per instant at tenths of the attained range.
CoareaStats coarea_stats(const ObservationData& data, const ModelParams& params,
                         const std::vector<std::size_t>& instants) {
  CoareaStats st;
  for (std::size_t k : instants) {
    const IntervalSet r = attained_range(data, k);
    for (int i = 1; i <= 9; ++i) {
      const double s = r.lo() + (r.hi() - r.lo()) * i / 10.0;
      const auto co = coarea_coefficients(data, params.gamma, s, k);
      if (co.degenerate || co.crossings == 0) continue;
      const double res =
          coarea_identity_residual(co, params.b(s), params.b(s) * params.df(s));
      st.worst = std::max(st.worst, res);
      st.mean += res;
      ++st.samples;
    }
  }
  if (st.samples) st.mean /= static_cast<double>(st.samples);
  return st;
}

std::function<double(double)> truth_fprime(const ModelParams& p) {
  return [p](double s) { return p.df(s); };
}

std::function<double(double)> truth_b(const ModelParams& p) {
  return [p](double s) { return p.b(s); };
}

double fprime_error(const ObservationData& data, const std::vector<std::size_t>& idx,
                    double alpha) {
  const ModelParams p = ModelParams::paper();
  const auto problem = assemble_problem(ProblemKind::identify_f, data, p, idx);
  const auto sol = tikhonov_solve(problem, alpha);
  const auto fp = recover_fprime(solution_function(problem.grid, sol.coefficients), p.mobility);
  return range_restricted_error([&](double s) { return fp.eval(s); }, truth_fprime(p),
                                attained_range(data, idx));
}

Outcome mass_conservation() {
  const auto& run = paper_run();
  double drift = 0.0;
  for (std::size_t k = 0; k < run.traj.size(); ++k) {
    drift = std::max(drift, std::abs(mass(run.traj.phi_field(k)) - 0.1));
  }
  return {drift <= 1e-10 && run.traj.steps() == 1000,
          fmt("max |mass - 0.1| = %.2e over %zu steps (tol 1e-10)", drift, run.traj.steps())};
}

Outcome energy_dissipation() {
  const auto& run = paper_run();
  double inc = -std::numeric_limits<double>::infinity();
  double prev = energy(run.traj.phi_field(0), run.params);
  const double first = prev;
  for (std::size_t k = 1; k < run.traj.size(); ++k) {
    const double e = energy(run.traj.phi_field(k), run.params);
    inc = std::max(inc, e - prev);
    prev = e;
  }
  return {inc <= 1e-10,
          fmt("max energy increment %.2e (tol 1e-10), energy %.6f -> %.6f", inc, first, prev)};
}

Outcome scaling_invariance() {
  const auto r = verify_scaling_invariance(paper_phi0(), ModelParams::paper(), 2.0, 1.0, kT, kTau);
  const auto id = verify_scaling_invariance(paper_phi0(), ModelParams::paper(), 1.0, 0.0, 4e-4, kTau);
  return {r.phi_relative_deviation <= 1e-8 && r.mu_deviation <= 1e-6 && id.bitwise_identical,
          fmt("d = 2, c = 1: phi deviation %.2e (tol 1e-8), mu deviation %.2e (tol 1e-6); "
              "identity bitwise %s",
              r.phi_relative_deviation, r.mu_deviation, id.bitwise_identical ? "yes" : "no")};
}

Outcome dual_norm_oracle() {
  const double exact = std::sqrt(0.5) / std::sqrt(1.0 + 4.0 * kPi * kPi);
  bool ok = true;
  std::string detail;
  for (auto kind : {BasisKind::quadratic_fe, BasisKind::periodic_cubic_spline}) {
    double prev = std::numeric_limits<double>::infinity();
    double last = 0.0;
    bool converging = true;
    for (std::size_t n : {50u, 100u, 200u, 400u}) {
      const SpatialBasis basis(kind, PeriodicMesh(n));
      last = std::abs(dual_norm_hm1(load_vector(basis, sine, 8), assemble_grams(basis)) - exact);
      // an error already at round-off cannot decrease further
      converging = converging && (last < prev || last < 1e-12);
      prev = last;
    }
    ok = ok && converging && last <= 1e-4;
    detail += fmt("%s error at n = 400: %.2e%s; ", kind == BasisKind::quadratic_fe ? "P2" : "spline",
                  last, converging ? "" : " (not converging)");
  }
  detail += "tol 1e-4";
  return {ok, detail};
}

Outcome coarea_identity() {
  const auto& run = paper_run();
  const auto instants = thin(run.window, 10);
  const CoareaStats st = coarea_stats(run.data, run.params, instants);
  const ObservationData fine = restrict_to_data_grid(paper_trajectory(2 * kCells, kWindowEnd), 2);
  std::vector<std::size_t> fine_instants;
  for (std::size_t k : instants) fine_instants.push_back(fine.index_of(run.data.times[k]));
  const CoareaStats fst = coarea_stats(fine, run.params, fine_instants);

  const SpatialBasis sb(BasisKind::periodic_cubic_spline, PeriodicMesh(1024));
  const PeriodicField s = interpolate(sb, sine);
  const double gamma = 0.003;
  const auto co = coarea_coefficients(s, s, gamma, 0.0);
  const double e_c = std::abs(co.A_c - 4.0 * kPi);
  const double e_b = std::abs(co.A_b - 16.0 * gamma * kPi * kPi * kPi);

  const bool ok = st.samples >= 20 && st.worst <= 5e-2 && fst.mean < st.mean && e_c <= 1e-6 &&
                  e_b <= 1e-6;
  return {ok, fmt("%zu samples, worst %.3e mean %.3e (tol 5e-2); refined n = %zu worst %.3e "
                  "mean %.3e; sine A_c error %.1e A_b error %.1e (tol 1e-6)",
                  st.samples, st.worst, st.mean, 2 * kCells, fst.worst, fst.mean, e_c, e_b)};
}

Outcome perturbation_scaling() {
  const auto& run = paper_run();
  const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
  bool ok = true;
  std::string detail;
  for (auto kind : {ProblemKind::identify_f, ProblemKind::identify_b, ProblemKind::identify_joint}) {
    const auto problem = assemble_problem(kind, run.data, run.params, run.window);
    const Eigen::VectorXd x_dagger = tikhonov_solve_direct(problem, 1e-14).coefficients;
    const auto probe = perturbation_scaling_probe(kind, run.data, run.params, run.window, deltas,
                                                  x_dagger, 1);
    ok = ok && std::abs(probe.slope - 1.0) <= 0.2;
    detail += fmt("%s slope %.3f; ", to_string(kind), probe.slope);
  }
  detail += "tol 1.0 +- 0.2";
  return {ok, detail};
}

Outcome identify_f() {
  const auto& run = paper_run();
  const double err = fprime_error(run.data, run.window, 1e-10);
  return {err <= 0.10, fmt("relative L2 error of f' on R = %.4f (tol 0.10)", err)};
}

Outcome identify_b() {
  const auto& run = paper_run();
  const auto problem = assemble_problem(ProblemKind::identify_b, run.data, run.params, run.window);
  const auto sol = tikhonov_solve(problem, 1e-6);
  const auto b = solution_function(problem.grid, sol.coefficients);
  const IntervalSet obs =
      observable_range(run.data, run.params.gamma, run.params.potential, run.window);
  const double err =
      range_restricted_error([&](double s) { return b.eval(s); }, truth_b(run.params), obs);
  return {err <= 0.10, fmt("relative L2 error of b on observable range (measure %.3f) = %.4f "
                           "(tol 0.10)",
                           obs.measure(), err)};
}

Outcome identify_joint() {
  const auto& run = paper_run();
  const auto problem =
      assemble_problem(ProblemKind::identify_joint, run.data, run.params, run.window);
  const auto sol = tikhonov_solve(problem, 1e-9);
  const auto n = static_cast<Eigen::Index>(problem.grid.count);
  const auto b = solution_function(problem.grid, sol.coefficients.head(n));
  const auto c = solution_function(problem.grid, sol.coefficients.tail(n));
  const IntervalSet range = attained_range(run.data, run.window);
  const double eb =
      range_restricted_error([&](double s) { return b.eval(s); }, truth_b(run.params), range);
  const double ef = range_restricted_error([&](double s) { return c.eval(s) / b.eval(s); },
                                           truth_fprime(run.params), range);
  return {eb <= 0.15 && ef <= 0.15,
          fmt("b error %.4f, f' error %.4f on R (tol 0.15 each)", eb, ef)};
}

Outcome regularization_convergence() {
  const auto& run = paper_run();
  const auto problem = assemble_problem(ProblemKind::identify_f, run.data, run.params, run.window);
  const auto fp_dagger = recover_fprime(
      solution_function(problem.grid, tikhonov_solve_direct(problem, 1e-14).coefficients),
      run.params.mobility);
  const IntervalSet range = attained_range(run.data, run.window);
  bool ok = true;
  double prev = std::numeric_limits<double>::infinity();
  double prev_dagger = std::numeric_limits<double>::infinity();
  std::string errs;
  std::string dagger_errs;
  for (int k = 0; k <= 4; ++k) {
    const double delta = 1e-2 * std::pow(2.0, -k);
    const ObservationData noisy = inject_noise(run.data, delta, 100 + k);
    const auto noisy_problem =
        assemble_problem(ProblemKind::identify_f, noisy, run.params, run.window);
    const auto fp = recover_fprime(
        solution_function(noisy_problem.grid, tikhonov_solve(noisy_problem, delta).coefficients),
        run.params.mobility);
    const auto rec = [&](double s) { return fp.eval(s); };
    const double err = range_restricted_error(rec, truth_fprime(run.params), range);
    ok = ok && err <= 1.5 * prev;
    prev = err;
    errs += fmt("%.4f ", err);
    const double dist =
        range_restricted_error(rec, [&](double s) { return fp_dagger.eval(s); }, range);
    ok = ok && dist <= 1.5 * prev_dagger;
    prev_dagger = dist;
    dagger_errs += fmt("%.4f ", dist);
  }
  return {ok, fmt("f' errors on R for delta = 1e-2 * 2^-k: %s; distance to the minimum-norm "
                  "f' on R: %s(each <= 1.5 x previous)",
                  errs.c_str(), dagger_errs.c_str())};
}

Outcome tikhonov_oracle() {
  const auto& run = paper_run();
  double worst = 0.0;
  std::size_t widest = 0;
  AssemblyOptions coarse;
  coarse.grid = KnotGrid::with_spacing(0.25);
  AssemblyOptions joint;
  joint.grid = KnotGrid::with_spacing(0.5);
  for (auto kind : {ProblemKind::identify_f, ProblemKind::identify_b, ProblemKind::identify_joint}) {
    const auto& opts = kind == ProblemKind::identify_joint ? joint : coarse;
    const auto problem = assemble_problem(kind, run.data, run.params, run.window, opts);
    widest = std::max(widest, static_cast<std::size_t>(problem.cols()));
    for (double alpha : {1e-4, 1e-6, 1e-8, 1e-10}) {
      const auto cg = tikhonov_solve(problem, alpha);
      const auto direct = tikhonov_solve_direct(problem, alpha);
      worst = std::max(worst, (cg.coefficients - direct.coefficients).norm() /
                                  direct.coefficients.norm());
    }
  }
  std::size_t violations = 0;
  for (auto kind : {ProblemKind::identify_f, ProblemKind::identify_b, ProblemKind::identify_joint}) {
    const auto problem = assemble_problem(kind, run.data, run.params, run.window);
    const auto lc = lcurve_select(problem, default_alpha_grid());
    for (std::size_t i = 1; i < lc.points.size(); ++i) {
      violations += lc.points[i].residual_norm > lc.points[i - 1].residual_norm * (1 + 1e-12);
      violations += lc.points[i].solution_norm < lc.points[i - 1].solution_norm * (1 - 1e-12);
    }
  }
  return {worst <= 1e-10 && widest <= 10 && violations == 0,
          fmt("CG vs direct worst relative difference %.2e on <= %zu columns (tol 1e-10); "
              "%zu monotonicity violations on three sweeps",
              worst, widest, violations)};
}

Outcome lcurve_sanity() {
  // Diagonal toy: singular values 1 .. 1e-6 with multiplicity 10, noise sd 1e-3.
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
  AssembledProblem toy;
  toy.blocks.push_back(TimeBlock{0.0, 1, T, y});
  toy.M = GramFactor::identity(n);
  toy.R = Eigen::MatrixXd::Identity(n, n);
  std::vector<double> grid;
  for (int k = 0; k < 25; ++k) grid.push_back(std::pow(10.0, -0.5 * k));
  const auto lc = lcurve_select(toy, grid);
  std::size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double err = (lc.solutions[i].coefficients - x_true).norm();
    if (err < best_err) {
      best_err = err;
      best = i;
    }
  }
  const long gap = std::abs(static_cast<long>(lc.index) - static_cast<long>(best));

  // Paper problems: logged against the reference values, not gating.
  const auto& run = paper_run();
  std::string soft;
  const std::pair<ProblemKind, double> refs[] = {{ProblemKind::identify_f, 1e-10},
                                                 {ProblemKind::identify_b, 1e-6},
                                                 {ProblemKind::identify_joint, 1e-9}};
  for (const auto& [kind, ref] : refs) {
    const auto problem = assemble_problem(kind, run.data, run.params, run.window);
    const auto plc = lcurve_select(problem, default_alpha_grid());
    const double decades = std::abs(std::log10(plc.alpha_star / ref));
    soft += fmt("%s alpha* %.2e vs %.0e (%s); ", to_string(kind), plc.alpha_star, ref,
                decades <= 1.0 ? "within a decade" : "outside a decade");
  }
  return {gap <= 1, fmt("toy selected alpha %.1e vs brute-force %.1e (%ld grid steps, tol 1); "
                        "soft: %s",
                        grid[lc.index], grid[best], gap, soft.c_str())};
}

}  // namespace

int main() {
  report(1, "mass conservation", mass_conservation);
  report(2, "energy dissipation", energy_dissipation);
  report(3, "scaling invariance", scaling_invariance);
  report(4, "dual-norm oracle", dual_norm_oracle);
  report(5, "co-area identity", coarea_identity);
  report(6, "operator-perturbation scaling", perturbation_scaling);
  report(7, "identify-f reproduction", identify_f);
  report(8, "identify-b reproduction", identify_b);
  report(9, "joint identification", identify_joint);
  report(10, "regularization convergence", regularization_convergence);
  report(11, "Tikhonov oracle equivalence", tikhonov_oracle);
  report(12, "L-curve sanity", lcurve_sanity);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
