#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dde/dynamics.hpp"
#include "dde/model.hpp"
#include "dde/oracle.hpp"

namespace dde::cli {

using json = nlohmann::ordered_json;

enum class Format { json, csv };

struct RunConfig {
  std::string command;

  ModelParams params;
  std::optional<std::vector<double>> reduced;  // alpha1, beta2, gamma2, tau

  int jmin = -10;
  int jmax = 10;
  Truncation truncation;
  bool refine = false;
  Format format = Format::json;
  std::string out;  // empty: stdout

  // scan
  double r = 1.0;
  double a1 = 1.0;
  double a2 = 1.0;
  double tau2_min = 0.05;
  double tau2_max = 2.0;
  int grid_n = 100;

  // grid
  GridSpec grid{-2.0, 1.0, -20.0, 20.0, 400, 400};

  // simulate
  std::string history = "const:1";
  double dt = 0.01;
  double T = 60.0;
  bool fit = false;
  int samples = 0;

  unsigned threads = 1;

  /// Model parameters after applying the reduced form, if one was given.
  [[nodiscard]] ModelParams model() const;
  /// Throws dde::Error(invalid_argument) on anything the commands cannot use.
  void validate() const;
};

/// Parses argv-style arguments (without the program name). Sets `help_shown`
/// after printing help; the returned config is then meaningless.
RunConfig parse_args(const std::vector<std::string>& args, std::ostream& out, bool& help_shown);

struct Report {
  json data;
  std::string csv;
  int status = 0;  // 0 ok, 2 partial numerical failure
};

Report cmd_roots(const RunConfig& cfg);
Report cmd_scan(const RunConfig& cfg);
Report cmd_grid(const RunConfig& cfg);
Report cmd_check(const RunConfig& cfg);
Report cmd_simulate(const RunConfig& cfg);
Report cmd_single_lag(const RunConfig& cfg);

std::string emit(const Report& report, Format format);

/// Serialization helpers shared by the commands.
json to_json(complex z);
json to_json(double x);  // null when not finite
json to_json(const ModelParams& p);
json to_json(const ReducedParams& r);
json to_json(const AssumptionDiagnostics& d);
std::string format_double(double x);
/// RFC 4180 table from flat-ish records. Complex {re, im} members become
/// name_re / name_im columns, nested objects name.key; the header is the
/// union of keys in first-seen order.
std::string csv_table(const std::vector<json>& records);

/// Full command line entry point: 0 success, 1 invalid input, 2 partial
/// numerical failure. Errors go to `err` as one JSON line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// DDE_SPECTRA_THREADS if set (must be a positive integer), else the
/// hardware concurrency.
unsigned thread_cap();

}  // namespace dde::cli
