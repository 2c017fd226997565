#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <ostream>
#include <thread>

#include "dde/cli.hpp"
#include "dde/error.hpp"

namespace dde::cli {

namespace {

// JSON config files: top-level keys are the global options, an object keyed
// by a subcommand name holds that subcommand's options.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j = json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (!opt->get_configurable() || opt->get_single_name().empty()) continue;
      if (opt->count() > 0) {
        j[opt->get_single_name()] = opt->results().size() == 1 ? json(opt->results().front())
                                                               : json(opt->results());
      } else if (default_also && !opt->get_default_str().empty()) {
        j[opt->get_single_name()] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static void collect(const json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto sub = parents;
        sub.push_back(key);
        collect(value, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const json& v : value) item.inputs.push_back(scalar(key, v));
      } else {
        item.inputs.push_back(scalar(key, value));
      }
      items.push_back(std::move(item));
    }
  }

  static std::string scalar(const std::string& key, const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config key '" + key + "' has an unsupported value");
  }
};

const std::map<std::string, Format> kFormats{{"json", Format::json}, {"csv", Format::csv}};

}  // namespace

ModelParams RunConfig::model() const {
  if (!reduced) return params;
  const auto& v = *reduced;
  return from_reduced(v[0], v[1], v[2], v[3]);
}

void RunConfig::validate() const {
  const auto bad = [](const std::string& what) { throw Error(Errc::invalid_argument, what); };
  if (reduced && reduced->size() != 4) bad("--params-reduced takes alpha1,beta2,gamma2,tau");
  if (reduced && !((*reduced)[3] > 0.0)) bad("reduced tau must be positive");
  const ModelParams p = model();
  for (double x : {p.alpha, p.beta, p.gamma, p.tau1, p.tau2}) {
    if (!std::isfinite(x)) bad("model parameters must be finite");
  }
  if (jmin > jmax) bad("--jmin must not exceed --jmax");
  truncation.validate();
  if (command == "scan") {
    if (!(r > 0.0) || !(a1 > 0.0) || !(a2 > 0.0)) bad("--r, --a1, --a2 must be positive");
    if (!(p.tau1 > 0.0)) bad("--tau1 must be positive");
    if (!(tau2_min > 0.0) || !(tau2_min < tau2_max)) bad("scan needs 0 < --tau2-min < --tau2-max");
    if (grid_n < 2) bad("--grid-n must be >= 2");
  }
  if (command == "grid") grid.validate();
  if (command == "simulate") {
    if (!(dt > 0.0) || !(T > 0.0)) bad("--dt and --T must be positive");
    if (history.rfind("const:", 0) != 0) bad("--history must look like const:<value>");
    if (samples < 0) bad("--samples must be >= 0");
  }
}

RunConfig parse_args(const std::vector<std::string>& args, std::ostream& out, bool& help_shown) {
  help_shown = false;
  RunConfig cfg;

  CLI::App app{"Characteristic roots of two-lag linear delay differential equations", "dde-spectra"};
  app.fallthrough();
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values (flags take precedence)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  auto* alpha = app.add_option("--alpha", cfg.params.alpha, "Coefficient of x(t)");
  auto* beta = app.add_option("--beta", cfg.params.beta, "Coefficient of x(t - tau1)");
  auto* gamma = app.add_option("--gamma", cfg.params.gamma, "Coefficient of x(t - tau2)");
  auto* tau1 = app.add_option("--tau1", cfg.params.tau1, "First lag");
  auto* tau2 = app.add_option("--tau2", cfg.params.tau2, "Second lag");
  std::vector<double> reduced;
  auto* red = app.add_option("--params-reduced", reduced, "alpha1,beta2,gamma2,tau (sets tau1 = 1)")
                  ->delimiter(',')
                  ->expected(4);
  red->excludes(alpha)->excludes(beta)->excludes(gamma)->excludes(tau1)->excludes(tau2);
  app.add_option("--jmin", cfg.jmin, "Lowest branch index");
  app.add_option("--jmax", cfg.jmax, "Highest branch index");
  app.add_option("--mmax", cfg.truncation.m_max, "Series truncation in mu");
  app.add_option("--kmax", cfg.truncation.k_max, "Series truncation in sigma");
  app.add_flag("--refine", cfg.refine, "Newton-refine series roots");
  app.add_option("--format", cfg.format, "json or csv")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
  app.add_option("--out", cfg.out, "Output file (default stdout)");

  app.add_subcommand("roots", "Branch roots from the series expansion");

  auto* scan = app.add_subcommand("scan", "Principal root of the linearized blowfly model over tau2");
  scan->add_option("--r", cfg.r, "Growth rate");
  scan->add_option("--a1", cfg.a1, "Weight of the first lag");
  scan->add_option("--a2", cfg.a2, "Weight of the second lag");
  scan->add_option("--tau2-min", cfg.tau2_min, "Scan start");
  scan->add_option("--tau2-max", cfg.tau2_max, "Scan end");
  scan->add_option("--grid-n", cfg.grid_n, "Grid points");

  auto* grid = app.add_subcommand("grid", "log10 |transfer function| on a rectangle");
  grid->add_option("--re-min", cfg.grid.re_min);
  grid->add_option("--re-max", cfg.grid.re_max);
  grid->add_option("--im-min", cfg.grid.im_min);
  grid->add_option("--im-max", cfg.grid.im_max);
  grid->add_option("--n-re", cfg.grid.n_re, "Nodes along the real axis");
  grid->add_option("--n-im", cfg.grid.n_im, "Nodes along the imaginary axis");

  app.add_subcommand("check", "Assumption diagnostics per branch");

  auto* sim = app.add_subcommand("simulate", "Method-of-steps trajectory, optionally with a spectral fit");
  sim->add_option("--history", cfg.history, "Initial history, const:<value>");
  sim->add_option("--dt", cfg.dt, "Step");
  sim->add_option("--T", cfg.T, "Final time");
  sim->add_flag("--fit", cfg.fit, "Fit the refined branch roots to the history");
  sim->add_option("--samples", cfg.samples, "Fit samples (0: 4 * roots + 1)");

  app.add_subcommand("single-lag", "Roots of s = alpha + beta e^{-s tau1} via Lambert W");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    help_shown = true;
    return cfg;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    help_shown = true;
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw Error(Errc::invalid_argument, e.what());
  }

  for (const CLI::App* sub : app.get_subcommands()) cfg.command = sub->get_name();
  if (red->count() > 0) cfg.reduced = reduced;
  return cfg;
}

unsigned thread_cap() {
  if (const char* env = std::getenv("DDE_SPECTRA_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) {
      throw Error(Errc::invalid_argument, "DDE_SPECTRA_THREADS must be a positive integer");
    }
    return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace dde::cli
