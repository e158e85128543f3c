#pragma once

#include <fstream>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "chid/interval_set.hpp"
#include "chid/parameter_function.hpp"

namespace chid::io {

using Json = nlohmann::ordered_json;

/// {"kind": "spline", "lo", "hi", "values": [...]} or
/// {"kind": "polynomial", "id", "coefficients": [...]}
Json to_json(const ParameterFunction& p);
ParameterFunction function_from_json(const Json& j);

/// [[lo, hi], ...]
Json to_json(const IntervalSet& set);

void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

/// Comma-separated numeric table with a header row; numbers use the
/// shortest round-trip decimal form.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) {
    row(std::span<const double>(values.begin(), values.size()));
  }
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace chid::io
