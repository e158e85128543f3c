#include "chid/io/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "chid/error.hpp"

namespace chid::io {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ValidationError(key + ": " + what);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const std::string t = trim(v);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    fail(key, "expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const std::string t = trim(v);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    fail(key, "expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::vector<std::string> split(const std::string& v, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v)) out.push_back(to_double(key, item));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

void check_function(const std::string& key, const std::string& v) {
  try {
    (void)parse_function(v);
  } catch (const ValidationError& e) {
    fail(key, e.what());
  }
}

void assign(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "forward.gamma") c.forward.gamma = to_double(key, v);
  else if (key == "forward.potential") c.forward.potential = v;
  else if (key == "forward.mobility") c.forward.mobility = v;
  else if (key == "forward.initial") c.forward.initial = v;
  else if (key == "forward.n_cells") c.forward.n_cells = to_unsigned(key, v);
  else if (key == "forward.tau") c.forward.tau = to_double(key, v);
  else if (key == "forward.T") c.forward.T = to_double(key, v);
  else if (key == "data.factor") c.data.factor = to_unsigned(key, v);
  else if (key == "data.noise") c.data.noise = to_double(key, v);
  else if (key == "data.seed") c.data.seed = to_unsigned(key, v);
  else if (key == "data.times") c.data.times = to_doubles(key, v);
  else if (key == "data.window") {
    const auto w = to_doubles(key, v);
    if (w.size() != 2) fail(key, "expected two values 't0, t1'");
    c.data.window = {w[0], w[1]};
  } else if (key == "inverse.problem") {
    try {
      c.inverse.problem = parse_problem_kind(v);
    } catch (const ValidationError& e) {
      fail(key, e.what());
    }
  } else if (key == "inverse.alpha") {
    if (v == "lcurve") c.inverse.alpha.reset();
    else c.inverse.alpha = to_double(key, v);
  } else if (key == "inverse.alpha_grid") c.inverse.alpha_grid = to_doubles(key, v);
  else if (key == "inverse.sigma") c.inverse.sigma = to_double(key, v);
  else if (key == "inverse.threshold") {
    if (v == "relative") c.inverse.threshold.reset();
    else c.inverse.threshold = to_double(key, v);
  } else if (key == "inverse.condition_cap") c.inverse.condition_cap = to_double(key, v);
  else if (key == "output.dir") c.output.dir = v;
  else if (key == "output.formats") c.output.formats = split(v);
  else fail(key, "unknown key");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

RunConfig paper_preset() { return RunConfig{}; }

RunConfig parse_config(const std::string& text) {
  RunConfig c = paper_preset();
  std::stringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ValidationError("line " + std::to_string(lineno) +
                              ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("line " + std::to_string(lineno) +
                            ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    assign(c, key, trim(line.substr(eq + 1)));
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& c) {
  const auto& f = c.forward;
  if (!(f.gamma > 0.0)) fail("forward.gamma", "must be positive");
  if (f.n_cells < 4) fail("forward.n_cells", "must be at least 4");
  if (!(f.tau > 0.0)) fail("forward.tau", "must be positive");
  if (!(f.T > 0.0)) fail("forward.T", "must be positive");
  const double steps = f.T / f.tau;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
    fail("forward.T", "must be an integer multiple of forward.tau");
  }
  check_function("forward.potential", f.potential);
  check_function("forward.mobility", f.mobility);
  try {
    (void)parse_initial(f.initial);
  } catch (const ValidationError& e) {
    fail("forward.initial", e.what());
  }
  const auto& d = c.data;
  if (d.factor < 1) fail("data.factor", "must be at least 1");
  if (f.n_cells % d.factor != 0) {
    fail("data.factor", "must divide forward.n_cells");
  }
  if (!(d.noise >= 0.0)) fail("data.noise", "must be non-negative");
  for (double t : d.times) {
    if (!(t > 0.0 && t <= f.T)) fail("data.times", "instants must lie in (0, T]");
  }
  if (!(d.window.first >= 0.0 && d.window.first <= d.window.second &&
        d.window.second <= f.T)) {
    fail("data.window", "need 0 <= t0 <= t1 <= T");
  }
  const auto& inv = c.inverse;
  if (inv.alpha && !(*inv.alpha > 0.0)) fail("inverse.alpha", "must be positive");
  for (double a : inv.alpha_grid) {
    if (!(a > 0.0)) fail("inverse.alpha_grid", "values must be positive");
  }
  if (!(inv.sigma > 0.0)) fail("inverse.sigma", "must be positive");
  try {
    (void)KnotGrid::with_spacing(inv.sigma);
  } catch (const ValidationError& e) {
    fail("inverse.sigma", e.what());
  }
  if (inv.threshold && !(*inv.threshold >= 0.0)) {
    fail("inverse.threshold", "must be non-negative");
  }
  if (!(inv.condition_cap > 1.0)) fail("inverse.condition_cap", "must exceed 1");
  if (c.output.dir.empty()) fail("output.dir", "must not be empty");
  for (const auto& fmt : c.output.formats) {
    if (fmt != "csv" && fmt != "json") fail("output.formats", "unknown format '" + fmt + "'");
  }
}

std::map<std::string, std::string> config_entries(const RunConfig& c) {
  std::map<std::string, std::string> m;
  m["forward.gamma"] = format_double(c.forward.gamma);
  m["forward.potential"] = c.forward.potential;
  m["forward.mobility"] = c.forward.mobility;
  m["forward.initial"] = c.forward.initial;
  m["forward.n_cells"] = std::to_string(c.forward.n_cells);
  m["forward.tau"] = format_double(c.forward.tau);
  m["forward.T"] = format_double(c.forward.T);
  m["data.factor"] = std::to_string(c.data.factor);
  m["data.noise"] = format_double(c.data.noise);
  m["data.seed"] = std::to_string(c.data.seed);
  if (!c.data.times.empty()) m["data.times"] = join(c.data.times);
  m["data.window"] = join({c.data.window.first, c.data.window.second});
  m["inverse.problem"] = to_string(c.inverse.problem);
  m["inverse.alpha"] = c.inverse.alpha ? format_double(*c.inverse.alpha) : "lcurve";
  if (!c.inverse.alpha_grid.empty()) m["inverse.alpha_grid"] = join(c.inverse.alpha_grid);
  m["inverse.sigma"] = format_double(c.inverse.sigma);
  m["inverse.threshold"] =
      c.inverse.threshold ? format_double(*c.inverse.threshold) : "relative";
  m["inverse.condition_cap"] = format_double(c.inverse.condition_cap);
  m["output.dir"] = c.output.dir;
  std::string formats;
  for (std::size_t i = 0; i < c.output.formats.size(); ++i) {
    if (i) formats += ", ";
    formats += c.output.formats[i];
  }
  m["output.formats"] = formats;
  return m;
}

std::string to_text(const RunConfig& c) {
  std::string out;
  for (const auto& [k, v] : config_entries(c)) out += k + " = " + v + "\n";
  return out;
}

ParameterFunction parse_function(const std::string& spec) {
  if (ParameterFunction::in_catalog(spec)) return ParameterFunction::from_catalog(spec);
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw ValidationError("unknown function '" + spec + "'");
  }
  const std::string kind = spec.substr(0, colon);
  const std::string body = spec.substr(colon + 1);
  const auto values = to_doubles("value", body);
  if (kind == "constant") {
    if (values.size() != 1) throw ValidationError("constant takes one value");
    return ParameterFunction::constant(values[0]);
  }
  if (kind == "poly") {
    if (values.empty()) throw ValidationError("poly needs coefficients");
    return ParameterFunction::polynomial(Polynomial(values), spec);
  }
  if (kind == "spline") {
    if (values.size() < 4) throw ValidationError("spline needs at least 4 values");
    const KnotGrid grid{-1.0, 1.0, values.size()};
    return ParameterFunction::spline(
        grid, Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                static_cast<Eigen::Index>(values.size())));
  }
  throw ValidationError("unknown function kind '" + kind + "'");
}

std::function<double(double)> parse_initial(const std::string& spec) {
  if (spec == "paper-phi0") return paper_initial_phase;
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw ValidationError("unknown initial phase '" + spec + "'");
  }
  const std::string kind = spec.substr(0, colon);
  const auto values = to_doubles("value", spec.substr(colon + 1));
  if (kind == "constant" && values.size() == 1) {
    const double m = values[0];
    return [m](double) { return m; };
  }
  if (kind == "sine" && values.size() == 3) {
    const double a = values[0], k = values[1], m = values[2];
    return [=](double x) { return m + a * std::sin(2.0 * std::numbers::pi * k * x); };
  }
  throw ValidationError("malformed initial phase '" + spec + "'");
}

ModelParams model_params(const ForwardConfig& c) {
  ModelParams p{c.gamma, parse_function(c.mobility), parse_function(c.potential)};
  p.validate();
  return p;
}

}  // namespace chid::io
