#include "chid_tools/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include "chid/diagnostics.hpp"
#include "chid/error.hpp"
#include "chid/forward.hpp"
#include "chid/io/container.hpp"
#include "chid/io/records.hpp"
#include "chid/postprocess.hpp"

namespace chid::tools {
namespace {

namespace fs = std::filesystem;
using io::Json;

constexpr double kInvariantTolerance = 1e-10;
constexpr std::size_t kDiagnosticInstants = 40;
constexpr std::size_t kSampleCount = 401;

// Wall-clock timings go to a side file so reports stay byte-reproducible.
class Timings {
 public:
  Timings(std::string path, std::ostream* log) : path_(std::move(path)), log_(log) {}

  template <class Fn>
  auto measure(const std::string& stage, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = fn();
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    lines_ += stage + " " + io::format_double(s) + "\n";
    if (log_) *log_ << stage << ": " << s << " s\n";
    return result;
  }

  void write() const {
    std::ofstream out(path_, std::ios::trunc);
    out << lines_;
  }

 private:
  std::string path_;
  std::ostream* log_;
  std::string lines_;
};

std::string out_path(const io::RunConfig& c, const std::string& name) {
  return (fs::path(c.output.dir) / name).string();
}

void prepare_output(const io::RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.output.dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + c.output.dir + "'");
}

bool wants(const io::RunConfig& c, const char* format) {
  for (const auto& f : c.output.formats) {
    if (f == format) return true;
  }
  return false;
}

Json config_echo(const io::RunConfig& c) {
  Json j = Json::object();
  for (const auto& [k, v] : io::config_entries(c)) j[k] = v;
  return j;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json data_summary(const ObservationData& d) {
  Json j;
  j["fingerprint"] = hex(d.fingerprint());
  j["provenance"] = to_string(d.provenance);
  j["n_cells"] = d.basis.mesh().n_cells();
  j["tau"] = d.tau;
  j["instants"] = d.size();
  j["noise_level"] = d.noise_level;
  j["interpolation_discrepancy_h1"] = d.interpolation_discrepancy;
  j["noise_h3_max"] = d.noise.h3_max;
  j["noise_h1_max"] = d.noise.h1_max;
  j["noise_dt_hm1_max"] = d.noise.dt_hm1_max;
  j["noise_dt_hm1_l2"] = d.noise.dt_hm1_l2;
  return j;
}

std::string input_or(const CommandOptions& o, const char* fallback) {
  return o.input ? *o.input : out_path(o.config, fallback);
}

std::optional<double> threshold_of(const io::RunConfig& c) { return c.inverse.threshold; }

KnotGrid knot_grid(const io::RunConfig& c) { return KnotGrid::with_spacing(c.inverse.sigma); }

std::vector<std::size_t> thin(const std::vector<std::size_t>& idx, std::size_t max) {
  if (idx.size() <= max) return idx;
  std::vector<std::size_t> out;
  const std::size_t stride = (idx.size() + max - 1) / max;
  for (std::size_t i = stride - 1; i < idx.size(); i += stride) out.push_back(idx[i]);
  return out;
}

// 2x2 condition of the co-area system at s for two instants; inf when either
// level set has no crossings or is degenerate.
double pair_condition(const CoareaCoefficients& a, const CoareaCoefficients& b,
                      double cap) {
  if (a.crossings == 0 || b.crossings == 0 || a.degenerate || b.degenerate) {
    return std::numeric_limits<double>::infinity();
  }
  Eigen::Matrix2d rows;
  rows << a.A_b, a.A_c, b.A_b, b.A_c;
  return independence_from_rows(rows, cap).condition;
}

}  // namespace

std::vector<std::size_t> selected_indices(const io::DataConfig& config,
                                          const ObservationData& data) {
  std::vector<std::size_t> out;
  if (!config.times.empty()) {
    for (double t : config.times) out.push_back(data.index_of(t));
  } else {
    out = data.window(config.window.first, config.window.second);
  }
  if (out.empty()) throw ValidationError("data selection contains no instants");
  return out;
}

int cmd_simulate(const CommandOptions& o) {
  const auto& c = o.config;
  prepare_output(c);
  Timings timings(out_path(c, "simulate_timings.txt"), o.log);
  const ModelParams params = io::model_params(c.forward);
  const ForwardSolver solver(PeriodicMesh(c.forward.n_cells), params);
  const PeriodicField phi0 = interpolate(solver.basis(), io::parse_initial(c.forward.initial));
  const Trajectory traj = timings.measure("forward", [&] {
    return solver.simulate(phi0, c.forward.T, c.forward.tau);
  });
  io::write_trajectory(out_path(c, "trajectory.chid"), traj, config_echo(c).dump());

  const double m0 = mass(traj.phi_field(0));
  double drift = 0.0;
  double max_increment = -std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  double e_prev = energy(traj.phi_field(0), params);
  const double e0 = e_prev;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    drift = std::max(drift, std::abs(mass(traj.phi_field(k)) - m0));
    const double e = energy(traj.phi_field(k), params);
    max_increment = std::max(max_increment, e - e_prev);
    if (e - e_prev > kInvariantTolerance) ++violations;
    e_prev = e;
  }
  if (wants(c, "json")) {
    Json r;
    r["command"] = "simulate";
    r["config"] = config_echo(c);
    r["steps"] = traj.steps();
    r["stored_states"] = traj.size();
    r["initial_mass"] = m0;
    r["mass_drift_max"] = drift;
    r["energy_initial"] = e0;
    r["energy_final"] = e_prev;
    r["energy_increment_max"] = max_increment;
    r["energy_violations"] = violations;
    r["tolerance"] = kInvariantTolerance;
    io::write_json(out_path(c, "simulate_report.json"), r);
  }
  timings.write();
  return kSuccess;
}

int cmd_make_data(const CommandOptions& o) {
  const auto& c = o.config;
  prepare_output(c);
  Timings timings(out_path(c, "make_data_timings.txt"), o.log);
  const Trajectory traj = io::read_trajectory(input_or(o, "trajectory.chid"));
  ObservationData data = timings.measure("restrict", [&] {
    return restrict_to_data_grid(traj, c.data.factor);
  });
  if (c.data.noise > 0.0) {
    data = timings.measure("noise", [&] { return inject_noise(data, c.data.noise, c.data.seed); });
  }
  io::write_observation(out_path(c, "observation.chid"), data, config_echo(c).dump());

  const ModelParams params = io::model_params(c.forward);
  const auto instants = thin(selected_indices(c.data, data), kDiagnosticInstants);
  struct Slice {
    IntervalSet attained;
    IntervalSet observable;
    std::vector<CoareaCoefficients> coeffs;
  };
  std::vector<double> levels;
  for (int j = 1; j < 40; ++j) levels.push_back(-1.0 + 0.05 * j);
  std::vector<Slice> slices(instants.size());
  timings.measure("diagnostics", [&] {
    for (std::size_t i = 0; i < instants.size(); ++i) {
      const std::size_t k = instants[i];
      slices[i].attained = attained_range(data, k);
      slices[i].observable =
          observable_range(data, params.gamma, params.potential, k, threshold_of(c));
      for (double s : levels) {
        slices[i].coeffs.push_back(coarea_coefficients(data, params.gamma, s, k));
      }
    }
    return 0;
  });
  if (wants(c, "csv")) {
    io::CsvWriter csv(out_path(c, "diagnostics.csv"),
                      {"t", "s", "A_b", "A_c", "A", "cond", "in_R", "in_Rtilde"});
    for (std::size_t i = 0; i < instants.size(); ++i) {
      const std::size_t partner = i + 1 < instants.size() ? i + 1 : (i > 0 ? i - 1 : i);
      for (std::size_t j = 0; j < levels.size(); ++j) {
        const auto& a = slices[i].coeffs[j];
        const double cond =
            partner == i ? std::numeric_limits<double>::infinity()
                         : pair_condition(a, slices[partner].coeffs[j], c.inverse.condition_cap);
        csv.row({data.times[instants[i]], levels[j], a.A_b, a.A_c, a.A, cond,
                 slices[i].attained.contains(levels[j]) ? 1.0 : 0.0,
                 slices[i].observable.contains(levels[j]) ? 1.0 : 0.0});
      }
    }
    csv.close();
  }
  if (wants(c, "json")) {
    Json r;
    r["command"] = "make-data";
    r["config"] = config_echo(c);
    r["data"] = data_summary(data);
    IntervalSet all_r;
    IntervalSet all_o;
    Json per = Json::array();
    for (std::size_t i = 0; i < instants.size(); ++i) {
      all_r.add(slices[i].attained);
      all_o.add(slices[i].observable);
      Json e;
      e["t"] = data.times[instants[i]];
      e["attained"] = io::to_json(slices[i].attained);
      e["observable"] = io::to_json(slices[i].observable);
      per.push_back(e);
    }
    r["ranges"] = per;
    r["attained_union"] = io::to_json(all_r);
    r["observable_union"] = io::to_json(all_o);
    io::write_json(out_path(c, "make_data_report.json"), r);
  }
  timings.write();
  return kSuccess;
}

namespace {

struct Identification {
  AssembledProblem problem;
  RegularizedSolution solution;
  std::optional<LCurveResult> lcurve;
};

Identification identify(const CommandOptions& o, const ObservationData& data,
                        const ModelParams& params, const std::vector<std::size_t>& idx,
                        Timings& timings, bool force_lcurve) {
  const auto& c = o.config;
  AssemblyOptions ao;
  ao.grid = knot_grid(c);
  ao.threads = o.threads;
  Identification out{timings.measure("assemble", [&] {
                       return assemble_problem(c.inverse.problem, data, params, idx, ao);
                     }),
                     {}, std::nullopt};
  if (c.inverse.alpha && !force_lcurve) {
    out.solution = timings.measure("solve", [&] {
      return tikhonov_solve(out.problem, *c.inverse.alpha);
    });
  } else {
    const auto grid = c.inverse.alpha_grid.empty() ? default_alpha_grid() : c.inverse.alpha_grid;
    out.lcurve = timings.measure("lcurve", [&] {
      return lcurve_select(out.problem, grid, o.threads);
    });
    out.solution = out.lcurve->solutions[out.lcurve->index];
  }
  return out;
}

void write_lcurve_csv(const std::string& path, const LCurveResult& lc) {
  io::CsvWriter csv(path, {"alpha", "residual_norm", "solution_norm", "curvature",
                           "flagged", "selected"});
  for (std::size_t i = 0; i < lc.points.size(); ++i) {
    const auto& p = lc.points[i];
    csv.row({p.alpha, p.residual_norm, p.solution_norm, p.curvature,
             p.flagged ? 1.0 : 0.0, i == lc.index ? 1.0 : 0.0});
  }
  csv.close();
}

Json lcurve_json(const LCurveResult& lc) {
  Json j;
  j["alpha_star"] = lc.alpha_star;
  j["index"] = lc.index;
  std::size_t flagged = 0;
  for (const auto& p : lc.points) flagged += p.flagged ? 1 : 0;
  j["flagged_points"] = flagged;
  return j;
}

Json solution_json(const RegularizedSolution& s) {
  Json j;
  j["alpha"] = s.alpha;
  j["residual_norm"] = s.residual_norm;
  j["solution_norm"] = s.solution_norm;
  j["cg_iterations"] = s.cg_iterations;
  j["normal_residual"] = s.normal_residual;
  return j;
}

}  // namespace

int cmd_identify(const CommandOptions& o) {
  const auto& c = o.config;
  prepare_output(c);
  Timings timings(out_path(c, "identify_timings.txt"), o.log);
  const ObservationData data = io::read_observation(input_or(o, "observation.chid"));
  const ModelParams params = io::model_params(c.forward);
  const auto idx = selected_indices(c.data, data);
  const Identification id = identify(o, data, params, idx, timings, false);
  const auto& grid = id.problem.grid;
  const auto n = static_cast<Eigen::Index>(grid.count);
  const auto& x = id.solution.coefficients;

  const IntervalSet attained = attained_range(data, idx);
  const IntervalSet observable =
      observable_range(data, params.gamma, params.potential, idx, threshold_of(c));
  std::vector<std::string> warnings = id.problem.warnings;
  Json functions;
  Json errors;
  auto error_on = [&](const IntervalSet& range, const std::function<double(double)>& rec,
                      const std::function<double(double)>& truth) -> Json {
    if (!(range.measure() > 0.0)) {
      warnings.emplace_back("empty range; error not defined");
      return nullptr;
    }
    return range_restricted_error(rec, truth, range);
  };
  const auto truth_b = [&](double s) { return params.b(s); };
  const auto truth_fp = [&](double s) { return params.df(s); };
  std::vector<std::string> header{"s"};
  std::vector<std::function<double(double)>> columns;

  switch (c.inverse.problem) {
    case ProblemKind::identify_f: {
      const auto cfun = solution_function(grid, x);
      const auto fp = recover_fprime(cfun, params.mobility);
      functions["c"] = io::to_json(cfun);
      functions["fprime"] = io::to_json(fp);
      errors["fprime_on_attained"] =
          error_on(attained, [&](double s) { return fp.eval(s); }, truth_fp);
      header.insert(header.end(), {"truth_fprime", "fprime", "truth_c", "c"});
      columns = {truth_fp, [fp](double s) { return fp.eval(s); },
                 [&](double s) { return params.b(s) * params.df(s); },
                 [cfun](double s) { return cfun.eval(s); }};
      break;
    }
    case ProblemKind::identify_b: {
      const auto bfun = solution_function(grid, x);
      functions["b"] = io::to_json(bfun);
      errors["b_on_observable"] =
          error_on(observable, [&](double s) { return bfun.eval(s); }, truth_b);
      header.insert(header.end(), {"truth_b", "b"});
      columns = {truth_b, [bfun](double s) { return bfun.eval(s); }};
      break;
    }
    case ProblemKind::identify_joint: {
      const auto bfun = solution_function(grid, x.head(n));
      const auto cfun = solution_function(grid, x.tail(n));
      functions["b"] = io::to_json(bfun);
      functions["c"] = io::to_json(cfun);
      try {
        functions["fprime"] = io::to_json(recover_fprime(cfun, bfun));
      } catch (const ValidationError& e) {
        warnings.emplace_back(std::string("knot-based f' recovery refused: ") + e.what() +
                              "; f' reported as the pointwise quotient c/b");
      }
      const auto fp = [bfun, cfun](double s) { return cfun.eval(s) / bfun.eval(s); };
      errors["b_on_attained"] =
          error_on(attained, [&](double s) { return bfun.eval(s); }, truth_b);
      errors["fprime_on_attained"] = error_on(attained, fp, truth_fp);
      header.insert(header.end(), {"truth_b", "b", "truth_fprime", "fprime"});
      columns = {truth_b, [bfun](double s) { return bfun.eval(s); }, truth_fp, fp};
      break;
    }
  }

  io::Json sol;
  sol["problem"] = to_string(c.inverse.problem);
  sol["alpha"] = id.solution.alpha;
  sol["coefficients"] = std::vector<double>(x.begin(), x.end());
  sol["functions"] = functions;
  io::write_json(out_path(c, "solution.json"), sol);

  if (wants(c, "csv")) {
    header.insert(header.end(), {"in_R", "in_Rtilde"});
    io::CsvWriter csv(out_path(c, "reconstruction.csv"), header);
    std::vector<double> row(header.size());
    for (std::size_t i = 0; i < kSampleCount; ++i) {
      const double s = -1.0 + 2.0 * static_cast<double>(i) / (kSampleCount - 1);
      row[0] = s;
      for (std::size_t j = 0; j < columns.size(); ++j) row[j + 1] = columns[j](s);
      row[columns.size() + 1] = attained.contains(s) ? 1.0 : 0.0;
      row[columns.size() + 2] = observable.contains(s) ? 1.0 : 0.0;
      csv.row(row);
    }
    csv.close();
    if (id.lcurve) write_lcurve_csv(out_path(c, "lcurve.csv"), *id.lcurve);
  }
  if (wants(c, "json")) {
    Json r;
    r["command"] = "identify";
    r["config"] = config_echo(c);
    r["data"] = data_summary(data);
    r["problem"] = to_string(c.inverse.problem);
    r["blocks"] = id.problem.blocks.size();
    r["unknowns"] = id.problem.cols();
    r["alpha_selection"] = id.lcurve ? "lcurve" : "fixed";
    if (id.lcurve) r["lcurve"] = lcurve_json(*id.lcurve);
    r["solution"] = solution_json(id.solution);
    r["attained_range"] = io::to_json(attained);
    r["observable_range"] = io::to_json(observable);
    r["errors"] = errors;
    r["warnings"] = warnings;
    io::write_json(out_path(c, "identify_report.json"), r);
  }
  timings.write();
  return kSuccess;
}

int cmd_lcurve(const CommandOptions& o) {
  const auto& c = o.config;
  prepare_output(c);
  Timings timings(out_path(c, "lcurve_timings.txt"), o.log);
  const ObservationData data = io::read_observation(input_or(o, "observation.chid"));
  const ModelParams params = io::model_params(c.forward);
  const auto idx = selected_indices(c.data, data);
  const Identification id = identify(o, data, params, idx, timings, true);
  if (wants(c, "csv")) write_lcurve_csv(out_path(c, "lcurve.csv"), *id.lcurve);
  if (wants(c, "json")) {
    Json r;
    r["command"] = "lcurve";
    r["config"] = config_echo(c);
    r["data"] = data_summary(data);
    r["problem"] = to_string(c.inverse.problem);
    r["lcurve"] = lcurve_json(*id.lcurve);
    r["solution"] = solution_json(id.solution);
    r["warnings"] = id.problem.warnings;
    io::write_json(out_path(c, "lcurve_report.json"), r);
  }
  timings.write();
  return kSuccess;
}

namespace {

struct Check {
  std::string name;
  bool passed = false;
  Json measured;
  Json tolerance;
  std::string detail;
};

Check run_check(const std::string& name, const std::function<Check()>& fn) {
  try {
    Check c = fn();
    c.name = name;
    return c;
  } catch (const Error& e) {
    return Check{name, false, nullptr, nullptr, e.what()};
  }
}

struct CoareaStats {
  double worst = 0.0;
  double mean = 0.0;
  std::size_t samples = 0;
};

CoareaStats coarea_stats(const ObservationData& data, const ModelParams& params,
                         const std::vector<std::size_t>& instants, double sign) {
  CoareaStats st;
  for (std::size_t k : instants) {
    const IntervalSet r = attained_range(data, k);
    for (int i = 1; i < 10; i += 2) {
      const double s = r.lo() + (r.hi() - r.lo()) * i / 10.0;
      auto co = coarea_coefficients(data, params.gamma, s, k);
      if (co.degenerate || co.crossings == 0) continue;
      co.A *= sign;
      const double res = coarea_identity_residual(co, params.b(s), params.b(s) * params.df(s));
      st.worst = std::max(st.worst, res);
      st.mean += res;
      ++st.samples;
    }
  }
  if (st.samples) st.mean /= static_cast<double>(st.samples);
  return st;
}

}  // namespace

int cmd_verify(const CommandOptions& o) {
  const auto& c = o.config;
  prepare_output(c);
  Timings timings(out_path(c, "verify_timings.txt"), o.log);
  const ModelParams params = io::model_params(c.forward);
  const auto initial = io::parse_initial(c.forward.initial);
  const PeriodicMesh mesh(c.forward.n_cells);
  const ForwardSolver solver(mesh, params);
  const PeriodicField phi0 = interpolate(solver.basis(), initial);
  const double t_end = std::max(c.data.window.second, c.forward.tau * 2.0 * c.data.factor);
  const double t_short = std::min(c.forward.T, 0.002);
  std::vector<Check> checks;

  const Trajectory traj = timings.measure("forward", [&] {
    return solver.simulate(phi0, t_end, c.forward.tau);
  });

  checks.push_back(run_check("conservation", [&] {
    const double m0 = mass(traj.phi_field(0));
    double drift = 0.0;
    double inc = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < traj.size(); ++k) {
      drift = std::max(drift, std::abs(mass(traj.phi_field(k)) - m0));
      inc = std::max(inc, energy(traj.phi_field(k), params) -
                              energy(traj.phi_field(k - 1), params));
    }
    Check ch;
    ch.measured = {{"mass_drift", drift}, {"energy_increment_max", inc}};
    ch.tolerance = kInvariantTolerance;
    ch.passed = drift <= kInvariantTolerance && inc <= kInvariantTolerance;
    return ch;
  }));

  checks.push_back(run_check("scaling_invariance", [&] {
    const auto r = verify_scaling_invariance(phi0, params, 2.0, 1.0, t_short, c.forward.tau);
    const auto id = verify_scaling_invariance(phi0, params, 1.0, 0.0, t_short, c.forward.tau);
    Check ch;
    ch.measured = {{"phi_relative_deviation", r.phi_relative_deviation},
                   {"mu_deviation", r.mu_deviation},
                   {"identity_bitwise", id.bitwise_identical}};
    ch.tolerance = {{"phi", 1e-8}, {"mu", 1e-6}};
    ch.passed = r.phi_relative_deviation <= 1e-8 && r.mu_deviation <= 1e-6 &&
                id.bitwise_identical;
    ch.detail = "transform d = 2, c = 1 over [0, " + io::format_double(t_short) + "]";
    return ch;
  }));

  checks.push_back(run_check("dual_norm", [&] {
    const double exact = std::sqrt(0.5) / std::sqrt(1.0 + 4.0 * std::numbers::pi * std::numbers::pi);
    Json errs = Json::array();
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    double last = 0.0;
    for (std::size_t n : {100u, 200u, 400u}) {
      const SpatialBasis basis(BasisKind::quadratic_fe, PeriodicMesh(n));
      const auto y = load_vector(
          basis, [](double x) { return std::sin(2.0 * std::numbers::pi * x); }, 8);
      last = std::abs(dual_norm_hm1(y, assemble_grams(basis)) - exact);
      errs.push_back(last);
      decreasing = decreasing && last <= prev;
      prev = last;
    }
    Check ch;
    ch.measured = {{"errors_n100_200_400", errs}};
    ch.tolerance = 1e-4;
    ch.passed = last <= 1e-4 && decreasing;
    return ch;
  }));

  const ObservationData data = restrict_to_data_grid(traj, c.data.factor);
  const auto window = thin(selected_indices(c.data, data), 10);

  checks.push_back(run_check("coarea_identity", [&] {
    const CoareaStats st = coarea_stats(data, params, window, 1.0);
    const ForwardSolver fine(PeriodicMesh(2 * c.forward.n_cells), params);
    const Trajectory ft = fine.simulate(interpolate(fine.basis(), initial), t_end, c.forward.tau);
    const ObservationData fdata = restrict_to_data_grid(ft, c.data.factor);
    std::vector<std::size_t> fwin;
    for (std::size_t k : window) fwin.push_back(fdata.index_of(data.times[k]));
    const CoareaStats fst = coarea_stats(fdata, params, fwin, 1.0);
    Check ch;
    ch.measured = {{"worst", st.worst}, {"mean", st.mean}, {"samples", st.samples},
                   {"refined_worst", fst.worst}, {"refined_mean", fst.mean}};
    ch.tolerance = 5e-2;
    ch.passed = st.samples >= 20 && st.worst <= 5e-2 && fst.mean < st.mean;
    return ch;
  }));

  checks.push_back(run_check("coarea_sine", [&] {
    const SpatialBasis sb(BasisKind::periodic_cubic_spline, PeriodicMesh(1024));
    const auto sine = interpolate(sb, [](double x) { return std::sin(2.0 * std::numbers::pi * x); });
    const double gamma = 0.003;
    const auto co = coarea_coefficients(sine, sine, gamma, 0.0);
    const double pi = std::numbers::pi;
    const double e_c = std::abs(co.A_c - 4.0 * pi);
    const double e_b = std::abs(co.A_b - 16.0 * gamma * pi * pi * pi);
    Check ch;
    ch.measured = {{"A_c_error", e_c}, {"A_b_error", e_b}};
    ch.tolerance = 1e-6;
    ch.passed = e_c <= 1e-6 && e_b <= 1e-6;
    return ch;
  }));

  checks.push_back(run_check("coarea_sign_control", [&] {
    const CoareaStats st = coarea_stats(data, params, window, -1.0);
    Check ch;
    ch.measured = {{"flipped_sign_worst", st.worst}};
    ch.tolerance = 5e-2;
    ch.passed = st.worst > 5e-2;
    ch.detail = "the identity must fail when the sign of A is flipped";
    return ch;
  }));

  checks.push_back(run_check("perturbation_scaling", [&] {
    const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    const auto idx = selected_indices(c.data, data);
    Json slopes;
    bool ok = true;
    for (auto kind : {ProblemKind::identify_f, ProblemKind::identify_b,
                      ProblemKind::identify_joint}) {
      AssemblyOptions ao;
      ao.grid = knot_grid(c);
      ao.threads = o.threads;
      const auto probe = perturbation_scaling_probe(
          kind, data, params, idx, deltas, truth_coefficients(kind, params, ao.grid),
          c.data.seed, ao);
      slopes[to_string(kind)] = probe.slope;
      ok = ok && std::abs(probe.slope - 1.0) <= 0.2;
    }
    Check ch;
    ch.measured = slopes;
    ch.tolerance = "slope 1.0 +- 0.2";
    ch.passed = ok;
    return ch;
  }));

  bool all = true;
  Json list = Json::array();
  for (const auto& ch : checks) {
    all = all && ch.passed;
    Json j;
    j["name"] = ch.name;
    j["passed"] = ch.passed;
    j["measured"] = ch.measured;
    j["tolerance"] = ch.tolerance;
    if (!ch.detail.empty()) j["detail"] = ch.detail;
    list.push_back(j);
    if (o.log) *o.log << (ch.passed ? "PASS " : "FAIL ") << ch.name << "\n";
  }
  if (wants(c, "json")) {
    Json r;
    r["command"] = "verify";
    r["config"] = config_echo(c);
    r["checks"] = list;
    r["all_passed"] = all;
    io::write_json(out_path(c, "verify_report.json"), r);
  }
  timings.write();
  return all ? kSuccess : kSuiteFailure;
}

}  // namespace chid::tools
