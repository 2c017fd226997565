#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dde/cli.hpp"

namespace dde::cli {

namespace {

bool is_complex(const json& v) {
  return v.is_object() && v.size() == 2 && v.contains("re") && v.contains("im");
}

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  if (v.is_number()) return format_double(v.get<double>());
  const std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

void flatten(const json& v, const std::string& name, json& row) {
  if (is_complex(v)) {
    row[name + "_re"] = v["re"];
    row[name + "_im"] = v["im"];
  } else if (v.is_object()) {
    for (const auto& [key, sub] : v.items()) flatten(sub, name.empty() ? key : name + "." + key, row);
  } else {
    row[name] = v;
  }
}

}  // namespace

json to_json(complex z) { return {{"re", to_json(z.real())}, {"im", to_json(z.imag())}}; }

json to_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json to_json(const ModelParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}, {"tau1", p.tau1}, {"tau2", p.tau2}};
}

json to_json(const ReducedParams& r) {
  return {{"alpha1", r.alpha1}, {"beta1", r.beta1}, {"gamma1", r.gamma1},
          {"tau", r.tau},       {"beta2", r.beta2}, {"gamma2", r.gamma2}};
}

json to_json(const AssumptionDiagnostics& d) {
  return {{"ratio", to_json(d.ratio)},
          {"mu_abs", to_json(d.mu_abs)},
          {"sigma_abs", to_json(d.sigma_abs)},
          {"advisable", d.advisable}};
}

std::string format_double(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_table(const std::vector<json>& records) {
  std::vector<json> rows;
  std::vector<std::string> header;
  for (const json& rec : records) {
    json row = json::object();
    flatten(rec, "", row);
    for (const auto& [key, _] : row.items()) {
      if (std::find(header.begin(), header.end(), key) == header.end()) header.push_back(key);
    }
    rows.push_back(std::move(row));
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << cell(json(header[i]));
  out << "\r\n";
  for (const json& row : rows) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out << ',';
      if (row.contains(header[i])) out << cell(row[header[i]]);
    }
    out << "\r\n";
  }
  return out.str();
}

std::string emit(const Report& report, Format format) {
  if (format == Format::csv) return report.csv;
  return report.data.dump(2) + "\n";
}

}  // namespace dde::cli
