#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "dde/cli.hpp"
#include "dde/error.hpp"
#include "dde/lambert.hpp"

namespace dde::cli {

namespace {

// Runs f(0..n-1) on up to `threads` workers. Results are written by index,
// so output order never depends on scheduling.
template <class F>
void parallel_for(int n, unsigned threads, F&& f) {
  const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(std::max(n, 0)));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

json failure(int j, const std::exception& e) {
  const auto* de = dynamic_cast<const Error*>(&e);
  return {{"j", j}, {"error", de ? std::string(to_string(de->code())) : "internal"}, {"message", e.what()}};
}

json header(const RunConfig& cfg, const ModelParams& p) {
  json h = {{"command", cfg.command}, {"params", to_json(p)}};
  if (cfg.reduced) h["params_reduced"] = *cfg.reduced;
  return h;
}

json truncation_json(const Truncation& t) { return {{"m_max", t.m_max}, {"k_max", t.k_max}}; }

// Newton tolerance on the original-time residual that keeps the rescaled
// residual (tau1 times larger) at or below 1e-12.
NewtonOptions refine_options(const ModelParams& p) {
  NewtonOptions o;
  o.tol = 0.5e-12 / std::max(1.0, p.tau1);
  return o;
}

struct BranchOutcome {
  std::optional<Root> root;
  json record;
  json fail;
};

std::vector<BranchOutcome> branch_roots(const RunConfig& cfg, const ModelParams& p, bool refine) {
  const int n = cfg.jmax - cfg.jmin + 1;
  std::vector<BranchOutcome> outcomes(static_cast<std::size_t>(n));
  const NewtonOptions opts = refine_options(p);
  parallel_for(n, cfg.threads, [&](int i) {
    const int j = cfg.jmin + i;
    BranchOutcome& o = outcomes[i];
    try {
      const Root series = root_series(p, j, cfg.truncation);
      json rec = {{"j", j}};
      Root root = series;
      json newton = nullptr;
      if (refine) {
        const RefinedRoot rr = refine_root(p, series, opts);
        newton = {{"status", std::string(to_string(rr.newton.status))},
                  {"iterations", rr.newton.iterations}};
        if (rr.newton.status != NewtonStatus::converged) {
          o.fail = {{"j", j},
                    {"error", "newton_" + std::string(to_string(rr.newton.status))},
                    {"message", "refinement did not converge"}};
          return;
        }
        root = rr.root;
      }
      rec["s"] = to_json(root.s_original);
      rec["s_rescaled"] = to_json(root.s_rescaled);
      rec["v"] = to_json(root.v);
      rec["residual_series"] = to_json(series.residual);
      rec["residual_refined"] = refine ? to_json(root.residual) : json(nullptr);
      rec["newton"] = newton;
      rec["diagnostics"] = to_json(series.diagnostics);
      o.record = std::move(rec);
      o.root = root;
    } catch (const std::exception& e) {
      o.fail = failure(j, e);
    }
  });
  return outcomes;
}

double parse_history(const std::string& spec) {
  const std::string value = spec.substr(6);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v)) {
    throw Error(Errc::invalid_argument, "cannot read history value from '" + spec + "'");
  }
  return v;
}

bool input_error(Errc code) {
  switch (code) {
    case Errc::invalid_argument:
    case Errc::coincident_lags:
    case Errc::single_lag_degenerate:
    case Errc::step_too_large:
    case Errc::singular_branch:
      return true;
    default:
      return false;
  }
}

}  // namespace

Report cmd_roots(const RunConfig& cfg) {
  const ModelParams p = cfg.model();
  p.validate();
  const ReducedParams r = reduce(p);

  Report rep;
  rep.data = header(cfg, p);
  rep.data["reduced"] = to_json(r);
  rep.data["truncation"] = truncation_json(cfg.truncation);
  rep.data["refine"] = cfg.refine;
  json records = json::array();
  json failed = json::array();
  for (BranchOutcome& o : branch_roots(cfg, p, cfg.refine)) {
    if (o.root) {
      records.push_back(std::move(o.record));
    } else {
      failed.push_back(std::move(o.fail));
    }
  }
  rep.csv = csv_table(std::vector<json>(records.begin(), records.end()));
  rep.status = failed.empty() ? 0 : 2;
  rep.data["records"] = std::move(records);
  rep.data["failed"] = std::move(failed);
  return rep;
}

Report cmd_scan(const RunConfig& cfg) {
  const double tau1 = cfg.model().tau1;
  const HopfScanReport scan =
      hopf_scan(cfg.r, cfg.a1, cfg.a2, tau1, cfg.tau2_min, cfg.tau2_max, cfg.grid_n, cfg.truncation);

  Report rep;
  rep.data = {{"command", cfg.command},
              {"blowfly", {{"r", cfg.r}, {"a1", cfg.a1}, {"a2", cfg.a2}, {"tau1", tau1}}},
              {"tau2_range", {cfg.tau2_min, cfg.tau2_max}},
              {"grid_n", cfg.grid_n},
              {"truncation", truncation_json(cfg.truncation)},
              {"conditions",
               {{"equal_weights", scan.conditions.equal_weights},
                {"tau1_condition", scan.conditions.tau1_condition},
                {"tau1_threshold", scan.conditions.tau1_threshold}}}};

  json points = json::array();
  std::vector<json> rows;
  for (const ScanPoint& pt : scan.points) {
    json rec = {{"tau2", pt.tau2},
                {"ok", pt.ok},
                {"s0", pt.ok ? to_json(pt.s0) : json(nullptr)},
                {"from_series", pt.from_series},
                {"series_ok", pt.series_ok},
                {"ratio", to_json(pt.ratio)}};
    if (!pt.ok) rep.status = 2;
    json row = {{"kind", "point"}};
    row.update(rec);
    rows.push_back(std::move(row));
    points.push_back(std::move(rec));
  }
  json crossings = json::array();
  for (const HopfCrossing& c : scan.crossings) {
    json rec = {{"tau2", c.tau2},
                {"s0", to_json(c.s0)},
                {"bracket_lo", c.bracket_lo},
                {"bracket_hi", c.bracket_hi},
                {"destabilizing", c.destabilizing}};
    json row = {{"kind", "crossing"}};
    row.update(rec);
    rows.push_back(std::move(row));
    crossings.push_back(std::move(rec));
  }
  rep.data["points"] = std::move(points);
  rep.data["crossings"] = std::move(crossings);
  rep.csv = csv_table(rows);
  return rep;
}

Report cmd_grid(const RunConfig& cfg) {
  const ModelParams p = cfg.model();
  p.validate();
  const GridSpec& g = cfg.grid;
  const TransferGrid grid = transfer_grid(p, g);

  Report rep;
  rep.data = header(cfg, p);
  rep.data["spec"] = {{"re_min", g.re_min}, {"re_max", g.re_max}, {"im_min", g.im_min},
                      {"im_max", g.im_max}, {"n_re", g.n_re},     {"n_im", g.n_im}};
  json values = json::array();
  std::ostringstream csv;
  csv << "im\\re";
  for (int col = 0; col < g.n_re; ++col) csv << ',' << format_double(g.re_at(col));
  csv << "\r\n";
  for (int row = 0; row < g.n_im; ++row) {
    json line = json::array();
    csv << format_double(g.im_at(row));
    for (int col = 0; col < g.n_re; ++col) {
      line.push_back(grid.at(row, col));
      csv << ',' << format_double(grid.at(row, col));
    }
    csv << "\r\n";
    values.push_back(std::move(line));
  }
  json maxima = json::array();
  for (const GridCell& m : local_maxima(grid)) {
    maxima.push_back({{"row", m.row},
                      {"col", m.col},
                      {"s", to_json(complex{g.re_at(m.col), g.im_at(m.row)})},
                      {"value", grid.at(m.row, m.col)}});
  }
  rep.data["values"] = std::move(values);
  rep.data["maxima"] = std::move(maxima);
  rep.csv = csv.str();
  return rep;
}

Report cmd_check(const RunConfig& cfg) {
  const ModelParams p = cfg.model();
  p.validate();
  const ReducedParams r = reduce(p);

  const int n = cfg.jmax - cfg.jmin + 1;
  std::vector<json> records(static_cast<std::size_t>(n));
  std::vector<json> fails(static_cast<std::size_t>(n));
  parallel_for(n, cfg.threads, [&](int i) {
    const int j = cfg.jmin + i;
    try {
      const BranchQuantities b = branch_quantities(r, j);
      json rec = {{"j", j}, {"L", to_json(b.L)}, {"sigma", to_json(b.sigma)},
                  {"c", to_json(b.c)}, {"mu", to_json(b.mu)}};
      rec.update(to_json(assumption_diagnostics(r, j)));
      records[i] = std::move(rec);
    } catch (const std::exception& e) {
      fails[i] = failure(j, e);
    }
  });

  Report rep;
  rep.data = header(cfg, p);
  rep.data["reduced"] = to_json(r);
  json ok = json::array();
  json failed = json::array();
  std::vector<json> rows;
  for (int i = 0; i < n; ++i) {
    if (!records[i].is_null()) {
      rows.push_back(records[i]);
      ok.push_back(std::move(records[i]));
    } else {
      failed.push_back(std::move(fails[i]));
    }
  }
  rep.status = failed.empty() ? 0 : 2;
  rep.data["records"] = std::move(ok);
  rep.data["failed"] = std::move(failed);
  rep.csv = csv_table(rows);
  return rep;
}

Report cmd_simulate(const RunConfig& cfg) {
  const ModelParams p = cfg.model();
  p.validate();
  const HistoryFn phi = constant_history(parse_history(cfg.history));
  const Trajectory traj = integrate_mos(p, phi, cfg.T, cfg.dt);

  Report rep;
  rep.data = header(cfg, p);
  rep.data["history"] = phi.tag;
  rep.data["T"] = cfg.T;
  rep.data["dt"] = traj.dt;

  std::optional<SpectralFit> fit;
  if (cfg.fit) {
    std::vector<Root> roots;
    json failed = json::array();
    for (BranchOutcome& o : branch_roots(cfg, p, true)) {
      if (o.root) {
        roots.push_back(*o.root);
      } else {
        failed.push_back(std::move(o.fail));
      }
    }
    json fj = {{"truncation", truncation_json(cfg.truncation)}, {"failed", failed}};
    if (!failed.empty()) rep.status = 2;
    try {
      fit = spectral_fit(p, phi, roots, cfg.samples);
      json terms = json::array();
      for (std::size_t i = 0; i < fit->roots.size(); ++i) {
        terms.push_back({{"j", fit->branches[i]},
                         {"s", to_json(fit->roots[i])},
                         {"C", to_json(fit->coefficients[i])}});
      }
      fj["terms"] = std::move(terms);
      fj["window_residual"] = to_json(fit->window_residual);
    } catch (const std::exception& e) {
      fj["error"] = failure(0, e)["error"];
      fj["message"] = e.what();
      rep.status = 2;
    }
    rep.data["fit"] = std::move(fj);
  }

  json samples = json::array();
  std::vector<json> rows;
  double max_dev = 0.0;
  double max_abs = 0.0;
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    json rec = {{"t", traj.t[k]}, {"x", traj.x[k]}};
    if (fit) {
      const double xs = fit->evaluate(traj.t[k]).real();
      rec["x_spectral"] = to_json(xs);
      max_dev = std::max(max_dev, std::abs(xs - traj.x[k]));
      max_abs = std::max(max_abs, std::abs(traj.x[k]));
    }
    rows.push_back(rec);
    samples.push_back(std::move(rec));
  }
  if (fit) rep.data["fit"]["max_relative_deviation"] = to_json(max_abs > 0 ? max_dev / max_abs : max_dev);
  rep.data["trajectory"] = std::move(samples);
  rep.csv = csv_table(rows);
  return rep;
}

Report cmd_single_lag(const RunConfig& cfg) {
  const ModelParams p = cfg.model();
  if (!(p.tau1 > 0.0)) throw Error(Errc::invalid_argument, "--tau1 must be positive");
  if (p.beta == 0.0) throw Error(Errc::invalid_argument, "--beta must be non-zero");
  const complex x{p.beta * p.tau1 * std::exp(-p.alpha * p.tau1), 0.0};

  Report rep;
  rep.data = {{"command", cfg.command},
              {"params", {{"alpha", p.alpha}, {"beta", p.beta}, {"tau", p.tau1}}},
              {"argument", to_json(x)}};
  json records = json::array();
  json failed = json::array();
  for (int j = cfg.jmin; j <= cfg.jmax; ++j) {
    try {
      const LambertResult w = lambert_w_ex(j, x);
      if (!w.converged) {
        failed.push_back({{"j", j}, {"error", "lambert_not_converged"}, {"message", "Halley iteration failed"}});
        continue;
      }
      const complex s = w.w / p.tau1 + p.alpha;
      records.push_back({{"j", j},
                         {"s", to_json(s)},
                         {"w", to_json(w.w)},
                         {"iterations", w.iterations},
                         {"near_branch_point", w.near_branch_point},
                         {"residual", to_json(std::abs(s - p.alpha - p.beta * std::exp(-s * p.tau1)))}});
    } catch (const std::exception& e) {
      failed.push_back(failure(j, e));
    }
  }
  rep.csv = csv_table(std::vector<json>(records.begin(), records.end()));
  rep.status = failed.empty() ? 0 : 2;
  rep.data["records"] = std::move(records);
  rep.data["failed"] = std::move(failed);
  return rep;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto report_error = [&err](const std::string& code, const std::string& message, int status) {
    json e = {{"error", code}, {"message", message}};
    if (code == "single_lag_degenerate") e["hint"] = "use the single-lag command";
    err << e.dump() << "\n";
    return status;
  };
  try {
    bool help = false;
    RunConfig cfg = parse_args(args, out, help);
    if (help) return 0;
    cfg.threads = thread_cap();
    cfg.validate();

    Report rep;
    if (cfg.command == "roots") rep = cmd_roots(cfg);
    else if (cfg.command == "scan") rep = cmd_scan(cfg);
    else if (cfg.command == "grid") rep = cmd_grid(cfg);
    else if (cfg.command == "check") rep = cmd_check(cfg);
    else if (cfg.command == "simulate") rep = cmd_simulate(cfg);
    else rep = cmd_single_lag(cfg);

    const std::string text = emit(rep, cfg.format);
    if (cfg.out.empty()) {
      out << text;
    } else {
      std::ofstream file(cfg.out, std::ios::binary);
      if (!(file << text)) return report_error("io_error", "cannot write " + cfg.out, 1);
    }
    return rep.status;
  } catch (const Error& e) {
    return report_error(std::string(to_string(e.code())), e.what(), input_error(e.code()) ? 1 : 2);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 2);
  }
}

}  // namespace dde::cli
