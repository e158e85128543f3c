#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chid/model.hpp"
#include "chid/problem.hpp"

namespace chid::io {

struct ForwardConfig {
  double gamma = 0.003;
  std::string potential = "paper-F";
  std::string mobility = "paper-b";
  std::string initial = "paper-phi0";
  std::size_t n_cells = 200;
  double tau = 2e-5;
  double T = 0.02;
};

struct DataConfig {
  std::size_t factor = 2;
  double noise = 0.0;
  std::uint64_t seed = 1;
  /// Explicit data instants; when empty the window is used.
  std::vector<double> times;
  std::pair<double, double> window{0.0, 0.008};
};

struct InverseConfig {
  ProblemKind problem = ProblemKind::identify_f;
  /// Fixed alpha; when absent alpha is chosen on the L-curve.
  std::optional<double> alpha;
  std::vector<double> alpha_grid;  ///< empty: default grid
  double sigma = 0.1;              ///< knot spacing on [-1,1]
  /// Absolute |mu'| threshold; absent: relative default.
  std::optional<double> threshold;
  double condition_cap = 1e6;
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> formats{"csv", "json"};
};

struct RunConfig {
  ForwardConfig forward;
  DataConfig data;
  InverseConfig inverse;
  OutputConfig output;
};

/// Flat text format: `key = value` lines with dotted keys (forward.gamma),
/// optional `[section]` headers that prefix following keys, `#` comments.
/// Unset keys keep the paper preset. Throws ValidationError naming the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Paper setup: gamma 0.003, paper F and b, paper phi0, 200 cells,
/// tau 2e-5, T 0.02, data window [0, 0.008].
RunConfig paper_preset();

/// Checks ranges and catalog references. Throws ValidationError with the
/// offending key in the message.
void validate(const RunConfig& config);

/// Canonical key/value listing; parsing it reproduces the configuration.
std::map<std::string, std::string> config_entries(const RunConfig& config);
std::string to_text(const RunConfig& config);

/// Parameter function from a value: catalog id ("paper-F", "paper-b",
/// "zero"), "constant:v", "poly:a0,a1,..." (ascending) or
/// "spline:v0,...,vN" (uniform knots on [-1,1]).
ParameterFunction parse_function(const std::string& spec);

/// Initial phase from a value: "paper-phi0", "constant:m" or
/// "sine:amplitude,mode,mean".
std::function<double(double)> parse_initial(const std::string& spec);

ModelParams model_params(const ForwardConfig& config);

/// Shortest round-trip decimal for a double.
std::string format_double(double v);

}  // namespace chid::io
