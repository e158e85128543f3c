#include "chid/io/records.hpp"

#include "chid/error.hpp"
#include "chid/io/config.hpp"

namespace chid::io {

Json to_json(const ParameterFunction& p) {
  Json j;
  if (const auto* s = p.as_spline()) {
    j["kind"] = "spline";
    j["lo"] = s->grid().lo;
    j["hi"] = s->grid().hi;
    j["values"] = std::vector<double>(s->values().begin(), s->values().end());
  } else {
    j["kind"] = "polynomial";
    j["id"] = p.formula_id();
    j["coefficients"] = p.as_polynomial()->coefficients();
  }
  return j;
}

ParameterFunction function_from_json(const Json& j) {
  try {
    const std::string kind = j.at("kind");
    if (kind == "spline") {
      const std::vector<double> v = j.at("values");
      const KnotGrid grid{j.at("lo").get<double>(), j.at("hi").get<double>(), v.size()};
      return ParameterFunction::spline(
          grid, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    if (kind == "polynomial") {
      const std::string id = j.value("id", "");
      if (ParameterFunction::in_catalog(id)) return ParameterFunction::from_catalog(id);
      return ParameterFunction::polynomial(
          Polynomial(j.at("coefficients").get<std::vector<double>>()), id);
    }
    throw ValidationError("unknown function kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed function record: ") + e.what());
  }
}

Json to_json(const IntervalSet& set) {
  Json j = Json::array();
  for (const auto& iv : set.intervals()) j.push_back({iv.lo, iv.hi});
  return j;
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw ValidationError("write to '" + path + "' failed");
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::trunc), columns_(header.size()) {
  if (!out_) throw ValidationError("cannot write '" + path + "'");
  for (std::size_t i = 0; i < header.size(); ++i) {
    out_ << (i ? "," : "") << header[i];
  }
  out_ << "\n";
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_) {
    throw ValidationError("row width does not match the header of '" + path_ + "'");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    out_ << (i ? "," : "") << format_double(values[i]);
  }
  out_ << "\n";
}

void CsvWriter::close() {
  out_.flush();
  if (!out_) throw ValidationError("write to '" + path_ + "' failed");
  out_.close();
}

}  // namespace chid::io
