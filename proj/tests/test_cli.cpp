#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dde/cli.hpp"

using namespace dde;
using cli::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const std::vector<std::string> kUsedPars2{"--params-reduced", "-1,0.001,6,4"};

std::vector<std::string> with(std::vector<std::string> base, const std::vector<std::string>& more) {
  base.insert(base.end(), more.begin(), more.end());
  return base;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dde_spectra_test_" + name);
}

void check_error_line(const Run& r, const std::string& code) {
  CHECK(r.out.empty());
  REQUIRE(!r.err.empty());
  CHECK(r.err.find('\n') == r.err.size() - 1);
  const json e = json::parse(r.err);
  CHECK(e["error"] == code);
  CHECK(e["message"].is_string());
}

}  // namespace

TEST_CASE("roots: refined records") {
  const Run r = run(with(kUsedPars2, {"roots", "--refine"}));
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());
  const json j = json::parse(r.out);
  REQUIRE(j["records"].size() == 21);
  CHECK(j["failed"].empty());
  int expect = -10;
  for (const json& rec : j["records"]) {
    CHECK(rec["j"] == expect++);
    CHECK(rec["residual_refined"].get<double>() <= 1e-12);
    CHECK(rec["residual_series"].get<double>() < 1e-4);
    CHECK(rec["newton"]["status"] == "converged");
  }
  CHECK(j["records"][10]["s"]["re"].get<double>() == doctest::Approx(-0.41695006495896390365).epsilon(1e-14));
  CHECK(j["records"][10]["diagnostics"]["ratio"].get<double>() == doctest::Approx(3.566e-4).epsilon(1e-3));
}

TEST_CASE("roots: tau1 != 1 keeps refined residuals below 1e-12") {
  const Run r = run({"--alpha", "-0.1", "--beta", "0.0005", "--gamma", "0.4", "--tau1", "10", "--tau2", "30",
                     "roots", "--refine", "--jmin", "-4", "--jmax", "4"});
  REQUIRE(r.code == 0);
  for (const json& rec : json::parse(r.out)["records"]) CHECK(rec["residual_refined"].get<double>() <= 1e-12);
}

TEST_CASE("roots: gamma = 0 is invalid input") {
  const Run r = run({"--alpha", "0", "--beta", "1", "--gamma", "0", "--tau2", "2", "roots"});
  CHECK(r.code == 1);
  check_error_line(r, "single_lag_degenerate");
  CHECK(json::parse(r.err)["hint"] == "use the single-lag command");
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"roots", "--nope"}).code == 1);
  CHECK(run({"--alpha", "abc", "roots"}).code == 1);
  CHECK(run({"--tau1", "2", "--tau2", "2", "--gamma", "1", "roots"}).code == 1);
  CHECK(run({"--tau1", "-1", "--gamma", "1", "roots"}).code == 1);
  CHECK(run(with(kUsedPars2, {"--jmin", "3", "--jmax", "2", "roots"})).code == 1);
  CHECK(run(with(kUsedPars2, {"--mmax", "0", "roots"})).code == 1);
  CHECK(run(with(kUsedPars2, {"--format", "xml", "roots"})).code == 1);
  CHECK(run({"--params-reduced", "1,2,3", "roots"}).code == 1);
  CHECK(run({"--params-reduced", "-1,0.001,6,4", "--alpha", "1", "roots"}).code == 1);

  const Run help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("roots") != std::string::npos);

  // gamma2 = 1 makes branch 0 singular; the other branches still succeed.
  const Run partial = run({"--params-reduced", "0,0.5,1,2", "--jmin", "-1", "--jmax", "1", "roots"});
  CHECK(partial.code == 2);
  const json pj = json::parse(partial.out);
  CHECK(pj["records"].size() == 2);
  REQUIRE(pj["failed"].size() == 1);
  CHECK(pj["failed"][0]["j"] == 0);
  CHECK(pj["failed"][0]["error"] == "singular_branch");
  CHECK(run({"--params-reduced", "0,0.5,1,2", "check"}).code == 2);

  CHECK(run({"--alpha", "0", "--beta", "0", "single-lag"}).code == 1);
  CHECK(run({"--alpha", "800", "--gamma", "0", "--tau2", "2", "simulate", "--T", "5"}).code == 2);
  CHECK(run({"--beta", "-1", "--gamma", "-1", "--tau1", "0.1", "--tau2", "1", "simulate", "--dt", "0.1"}).code == 1);
  CHECK(run({"--gamma", "-1", "--tau2", "2", "simulate", "--history", "const:x"}).code == 1);
  CHECK(run({"--gamma", "-1", "--tau2", "2", "simulate", "--history", "sin"}).code == 1);
  CHECK(run({"scan", "--tau2-min", "2", "--tau2-max", "1"}).code == 1);
  CHECK(run({"grid", "--n-re", "1"}).code == 1);
}

TEST_CASE("thread cap") {
  const std::vector<std::string> args = with(kUsedPars2, {"roots", "--refine"});
  setenv("DDE_SPECTRA_THREADS", "1", 1);
  const Run one = run(args);
  setenv("DDE_SPECTRA_THREADS", "4", 1);
  const Run four = run(args);
  CHECK(one.code == 0);
  CHECK(one.out == four.out);
  setenv("DDE_SPECTRA_THREADS", "zero", 1);
  const Run bad = run(args);
  CHECK(bad.code == 1);
  check_error_line(bad, "invalid_argument");
  unsetenv("DDE_SPECTRA_THREADS");
}

TEST_CASE("identical configs give byte-identical output") {
  const std::vector<std::vector<std::string>> commands{
      with(kUsedPars2, {"roots"}),
      with(kUsedPars2, {"check", "--format", "csv"}),
      with(kUsedPars2, {"grid", "--n-re", "20", "--n-im", "30"}),
      {"--tau1", "10", "scan", "--grid-n", "12"},
      with(kUsedPars2, {"simulate", "--T", "3", "--fit", "--jmin", "-3", "--jmax", "3"}),
      {"--beta", "-0.5", "--tau1", "10", "single-lag"},
  };
  for (const auto& args : commands) {
    const Run a = run(args);
    const Run b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
}

TEST_CASE("JSON reports round-trip") {
  cli::RunConfig cfg;
  cfg.reduced = std::vector<double>{-1, 0.001, 6, 4};
  cfg.jmin = -3;
  cfg.jmax = 3;
  cfg.refine = true;
  cfg.grid = {-1.5, 0.0, -4.0, 4.0, 15, 25};
  cfg.T = 3.0;
  cfg.fit = true;
  std::vector<cli::Report> reports;
  cfg.command = "roots";
  reports.push_back(cli::cmd_roots(cfg));
  cfg.command = "check";
  reports.push_back(cli::cmd_check(cfg));
  cfg.command = "grid";
  reports.push_back(cli::cmd_grid(cfg));
  cfg.command = "simulate";
  reports.push_back(cli::cmd_simulate(cfg));
  cfg.command = "single-lag";
  reports.push_back(cli::cmd_single_lag(cfg));
  cfg.command = "scan";
  cfg.reduced.reset();
  cfg.params.tau1 = 10.0;
  cfg.grid_n = 15;
  reports.push_back(cli::cmd_scan(cfg));
  for (const cli::Report& rep : reports) {
    CAPTURE(rep.data["command"]);
    CHECK(json::parse(cli::emit(rep, cli::Format::json)) == rep.data);
  }
}

TEST_CASE("CSV output") {
  const Run r = run(with(kUsedPars2, {"--format", "csv", "--jmin", "0", "--jmax", "2", "roots"}));
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0].rfind("j,s_re,s_im,s_rescaled_re,s_rescaled_im,v_re,v_im,residual_series", 0) == 0);
  CHECK(lines[1].rfind("0,-0.416950", 0) == 0);
  CHECK(lines[0].back() == '\r');

  CHECK(cli::format_double(0.1) == "0.10000000000000001");
  const std::string table = cli::csv_table({json{{"a", "x,y"}, {"z", {{"re", 1.5}, {"im", -2.0}}}},
                                            json{{"a", "say \"hi\""}, {"b", nullptr}}});
  CHECK(table == "a,z_re,z_im,b\r\n\"x,y\",1.5,-2,\r\n\"say \"\"hi\"\"\",,,\r\n");

  const Run grid = run(with(kUsedPars2, {"--format", "csv", "grid", "--re-min", "-1", "--re-max", "0", "--im-min",
                                         "0", "--im-max", "1", "--n-re", "3", "--n-im", "2"}));
  REQUIRE(grid.code == 0);
  CHECK(grid.out.rfind("im\\re,-1,-0.5,0\r\n0,", 0) == 0);

  const Run scan = run({"--tau1", "10", "--format", "csv", "scan", "--grid-n", "30"});
  REQUIRE(scan.code == 0);
  CHECK(scan.out.rfind("kind,tau2,ok,s0_re,s0_im,from_series,series_ok,ratio", 0) == 0);
  CHECK(scan.out.find("\r\ncrossing,") != std::string::npos);
}

TEST_CASE("config file precedence") {
  const auto path = temp_file("config.json");
  {
    std::ofstream f(path);
    f << R"({"alpha": -1, "beta": 0.00036787944117144233, "gamma": 0.10989383333691, "tau2": 4,
             "jmin": 0, "jmax": 0, "simulate": {"T": 2}})";
  }
  const Run from_file = run({"--config", path.string(), "roots"});
  REQUIRE(from_file.code == 0);
  const json a = json::parse(from_file.out);
  CHECK(a["params"]["alpha"] == -1.0);
  CHECK(a["records"].size() == 1);

  const Run overridden = run({"--config", path.string(), "--alpha", "-1.25", "roots"});
  REQUIRE(overridden.code == 0);
  CHECK(json::parse(overridden.out)["params"]["alpha"] == -1.25);

  const Run sim = run({"--config", path.string(), "simulate", "--dt", "0.1"});
  REQUIRE(sim.code == 0);
  CHECK(json::parse(sim.out)["T"] == 2.0);

  {
    std::ofstream f(path);
    f << R"({"alpha": -1, "unknown_key": 3})";
  }
  CHECK(run({"--config", path.string(), "roots"}).code == 1);
  {
    std::ofstream f(path);
    f << "not json";
  }
  CHECK(run({"--config", path.string(), "roots"}).code == 1);
  CHECK(run({"--config", "/nonexistent/file.json", "roots"}).code == 1);
  std::filesystem::remove(path);
}

TEST_CASE("--out writes the report to a file") {
  const auto path = temp_file("out.json");
  const Run r = run(with(kUsedPars2, {"--out", path.string(), "--jmin", "0", "--jmax", "0", "roots"}));
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  const json j = json::parse(f);
  CHECK(j["records"].size() == 1);
  std::filesystem::remove(path);
  CHECK(run(with(kUsedPars2, {"--out", "/nonexistent/dir/x.json", "roots"})).code == 1);
}

TEST_CASE("simulate and single-lag payloads") {
  const Run sim = run(with(kUsedPars2, {"simulate", "--T", "3", "--dt", "0.01", "--fit"}));
  REQUIRE(sim.code == 0);
  const json s = json::parse(sim.out);
  CHECK(s["history"] == "const:1");
  CHECK(s["trajectory"].size() == 301);
  CHECK(s["fit"]["terms"].size() == 21);
  CHECK(s["trajectory"][0]["x"] == 1.0);
  CHECK(s["trajectory"][0].contains("x_spectral"));

  const Run sl = run({"--alpha", "0", "--beta", "1", "--tau1", "1", "single-lag", "--jmin", "0", "--jmax", "0"});
  REQUIRE(sl.code == 0);
  const json l = json::parse(sl.out);
  CHECK(l["records"][0]["s"]["re"].get<double>() == doctest::Approx(0.5671432904097838).epsilon(1e-14));
  CHECK(l["records"][0]["residual"].get<double>() <= 1e-10);
}
