#include <doctest.h>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dde/dynamics.hpp"
#include "dde/error.hpp"
#include "support.hpp"

using namespace dde;

namespace {

std::vector<Root> refined_roots(const ModelParams& p, int jmax) {
  std::vector<Root> roots;
  for (int j = -jmax; j <= jmax; ++j) {
    const RefinedRoot rr = refine_root(p, root_series(p, j));
    REQUIRE(rr.newton.status == NewtonStatus::converged);
    roots.push_back(rr.root);
  }
  return roots;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected dde::Error");
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("histories") {
  const HistoryFn one = constant_history(1.0);
  CHECK(one(-3.0) == 1.0);
  CHECK(one.tag == "const:1");
  const HistoryFn mode = mode_history({-0.5, 2.0});
  CHECK(mode(-1.0) == doctest::Approx(std::exp(0.5) * std::cos(-2.0)));
}

TEST_CASE("integrate_mos: ODE reduction") {
  const ModelParams p{-1.0, 0.0, 0.0, 1.0, 2.0};
  const Trajectory tr = integrate_mos(p, constant_history(1.0), 5.0, 0.01);
  CHECK(tr.t.front() == 0.0);
  CHECK(tr.t.back() == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(tr.t.size() == tr.x.size());
  CHECK(std::abs(tr.x.back() - std::exp(-5.0)) < 1e-6);

  // Fourth order: halving dt divides the endpoint error by about 16.
  const double e1 = std::abs(integrate_mos(p, constant_history(1.0), 5.0, 0.2).x.back() - std::exp(-5.0));
  const double e2 = std::abs(integrate_mos(p, constant_history(1.0), 5.0, 0.1).x.back() - std::exp(-5.0));
  CHECK(e1 / e2 >= 14.0);
  CHECK(e1 / e2 <= 18.0);
}

TEST_CASE("integrate_mos: delayed terms against a closed form") {
  // x' = -x(t - 1), phi = 1: x = 1 - t on [0, 1], 1 - t + (t - 1)^2 / 2 on [1, 2].
  const ModelParams p{0.0, -1.0, 0.0, 1.0, 3.0};
  const Trajectory tr = integrate_mos(p, constant_history(1.0), 2.0, 0.01);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const double t = tr.t[i];
    const double exact = t <= 1.0 ? 1.0 - t : 1.0 - t + (t - 1.0) * (t - 1.0) / 2.0;
    CHECK(std::abs(tr.x[i] - exact) < 1e-7);
  }
}

TEST_CASE("integrate_delay: generic right-hand side matches the linear path") {
  const ModelParams p{0.1, -0.3, -0.7, 1.0, 2.5};
  const std::array<double, 2> lags{p.tau1, p.tau2};
  const DelayRhs rhs = [&](double, double x, std::span<const double> d) {
    return p.alpha * x + p.beta * d[0] + p.gamma * d[1];
  };
  const Trajectory a = integrate_delay(rhs, lags, constant_history(0.4), 20.0, 0.05);
  const Trajectory b = integrate_mos(p, constant_history(0.4), 20.0, 0.05);
  CHECK(a.x == b.x);

  // Nonlinear two-lag logistic model: small perturbations of x* decay for short lags.
  const std::array<double, 2> short_lags{0.5, 0.8};
  const DelayRhs blowfly = [](double, double x, std::span<const double> d) {
    return x * (1.0 - 0.5 * d[0] - 0.5 * d[1]);
  };
  const Trajectory nl = integrate_delay(blowfly, short_lags, constant_history(1.1), 60.0, 0.05);
  CHECK(std::abs(nl.x.back() - 1.0) < 1e-3);
}

TEST_CASE("integrate_mos: errors") {
  const ModelParams p{0.0, -0.5, -0.5, 1.0, 0.2};
  CHECK(code_of([&] { integrate_mos(p, constant_history(1.0), 5.0, 0.06); }) == Errc::step_too_large);
  CHECK(code_of([&] { integrate_mos(p, constant_history(1.0), -1.0, 0.01); }) == Errc::invalid_argument);
  try {
    integrate_mos({800.0, 0.0, 0.0, 1.0, 2.0}, constant_history(1.0), 5.0, 0.01);
    FAIL("overflow not reported");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_finite);
    CHECK(std::string(e.what()).find("t = ") != std::string::npos);
  }
}

TEST_CASE("blowfly trajectories: stable at 0.2, unstable at 1.3") {
  const Trajectory stable = integrate_mos(blowfly_linearize(1, 1, 1, 10, 0.2), constant_history(1.0), 60.0, 0.01);
  const Trajectory unstable = integrate_mos(blowfly_linearize(1, 1, 1, 10, 1.3), constant_history(0.1), 600.0, 0.01);
  CHECK(std::abs(stable.x[4000]) < std::abs(stable.x[0]));
  CHECK(testing::envelope_rate(stable.t, stable.x, 10.0, 60.0) < 0.0);
  CHECK(testing::envelope_rate(unstable.t, unstable.x, 100.0, 600.0) > 0.0);
}

TEST_CASE("envelope growth matches the rightmost root") {
  for (const auto& [tau2, hist] : {std::pair{0.2, 1.0}, std::pair{1.3, 0.1}}) {
    const ModelParams p = blowfly_linearize(1, 1, 1, 10, tau2);
    const auto s0 = principal_root(p, {});
    REQUIRE(s0.has_value());
    const Trajectory tr = integrate_mos(p, constant_history(hist), 3000.0, 0.02);
    const double rate = testing::envelope_rate(tr.t, tr.x, 2000.0, 3000.0);
    CAPTURE(tau2);
    CHECK(std::abs(rate - s0->s.real()) <= 0.05 * std::abs(s0->s.real()));
  }
}

TEST_CASE("spectral_fit: exact mode") {
  const ModelParams p = testing::used_pars_2();
  const std::vector<Root> roots = refined_roots(p, 10);
  const complex s0 = roots[10].s_original;
  for (FitMethod method : {FitMethod::least_squares, FitMethod::residue}) {
    const SpectralFit fit = spectral_fit(p, mode_history(s0), roots, 0, method);
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (roots[i].j == 0) {
        CHECK(std::abs(fit.coefficients[i] - 1.0) <= 1e-6);
      } else {
        CHECK(std::abs(fit.coefficients[i]) <= 1e-6);
      }
    }
  }
}

TEST_CASE("spectral_fit: real history gives conjugate coefficients") {
  const ModelParams p = testing::used_pars_2();
  const std::vector<Root> roots = refined_roots(p, 10);
  for (FitMethod method : {FitMethod::least_squares, FitMethod::residue}) {
    const SpectralFit fit = spectral_fit(p, constant_history(1.0), roots, 0, method);
    for (int j = 1; j <= 10; ++j) {
      CHECK(std::abs(fit.coefficients[10 + j] - std::conj(fit.coefficients[10 - j])) <= 1e-8);
    }
    for (double t = 0.0; t <= 3.0; t += 0.25) {
      const complex x = fit.evaluate(t);
      CHECK(std::abs(x.imag()) <= 1e-8 * std::max(1.0, std::abs(x)));
    }
  }
}

TEST_CASE("spectral_fit: residual shrinks as branches are added") {
  const ModelParams p = testing::used_pars_2();
  const std::vector<Root> all = refined_roots(p, 10);
  const std::vector<Root> few(all.begin() + 8, all.begin() + 13);
  const SpectralFit small = spectral_fit(p, constant_history(1.0), few);
  const SpectralFit large = spectral_fit(p, constant_history(1.0), all);
  CHECK(large.window_residual < small.window_residual);
  // Square collocation reproduces the samples.
  const SpectralFit square = spectral_fit(p, constant_history(1.0), all, static_cast<int>(all.size()));
  CHECK(square.window_residual < 1e-8);
}

TEST_CASE("spectral_fit: errors") {
  const ModelParams p = testing::used_pars_2();
  std::vector<Root> roots = refined_roots(p, 2);
  CHECK(code_of([&] { spectral_fit(p, constant_history(1.0), roots, 3); }) == Errc::invalid_argument);
  roots.push_back(roots[1]);
  roots.back().j = 7;
  try {
    spectral_fit(p, constant_history(1.0), roots);
    FAIL("coincident roots accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::rank_deficient);
    CHECK(std::string(e.what()).find("-1 and 7") != std::string::npos);
  }
}

TEST_CASE("blowfly linearization and Hopf hypotheses") {
  const ModelParams a = blowfly_linearize(1, 1, 1, 10, 0.7);
  CHECK(a.alpha == 0.0);
  CHECK(a.beta == -0.5);
  CHECK(a.gamma == -0.5);
  CHECK(a.tau1 == 10.0);
  CHECK(a.tau2 == 0.7);
  const ModelParams b = blowfly_linearize(2, 1, 3, 1, 2);
  CHECK(b.beta == -0.5);
  CHECK(b.gamma == -1.5);
  CHECK_THROWS_AS(blowfly_linearize(0, 1, 1, 1, 2), Error);

  const HopfConditions h = hopf_conditions(1, 1, 1, 10);
  CHECK(h.equal_weights);
  CHECK(h.tau1_threshold == 1.0);
  CHECK(h.tau1_condition);
  CHECK_FALSE(hopf_conditions(1, 1, 2, 10).equal_weights);
  CHECK_FALSE(hopf_conditions(1, 1, 1, 0.5).tau1_condition);
}

TEST_CASE("principal_root") {
  const auto pr = principal_root(testing::used_pars_2(), {});
  REQUIRE(pr.has_value());
  CHECK(std::abs(pr->s - testing::kUsedPars2Root) < 1e-14);
  CHECK(pr->from_series);
  CHECK(pr->series_ok);

  const auto fly = principal_root(blowfly_linearize(1, 1, 1, 10, 0.2), {});
  REQUIRE(fly.has_value());
  CHECK(fly->s.real() == doctest::Approx(-0.009045).epsilon(1e-3));
  CHECK(std::abs(fly->s.imag()) == doctest::Approx(0.2684).epsilon(1e-3));
}

TEST_CASE("hopf_scan") {
  const HopfScanReport coarse = hopf_scan(1, 1, 1, 10, 0.05, 2.0, 50);
  const HopfScanReport fine = hopf_scan(1, 1, 1, 10, 0.05, 2.0, 100);
  CHECK(fine.conditions.equal_weights);
  CHECK(fine.conditions.tau1_condition);
  REQUIRE(fine.points.size() == 100);
  for (const ScanPoint& pt : fine.points) CHECK(pt.ok);

  REQUIRE(!fine.crossings.empty());
  REQUIRE(!coarse.crossings.empty());
  const HopfCrossing& first = fine.crossings.front();
  CHECK(first.destabilizing);
  CHECK(std::abs(first.s0.real()) <= 1e-8);
  CHECK(first.bracket_lo <= first.tau2);
  CHECK(first.tau2 <= first.bracket_hi);
  // Independent Newton continuation puts the first crossing at 1.014081655858.
  CHECK(std::abs(first.tau2 - 1.014081655858) < 1e-6);
  CHECK(std::abs(first.tau2 - coarse.crossings.front().tau2) <= 1e-6);

  for (const ScanPoint& pt : fine.points) {
    if (std::abs(pt.tau2 - 0.2) < 0.01) CHECK(pt.s0.real() < 0.0);
    if (std::abs(pt.tau2 - 1.3) < 0.01) CHECK(pt.s0.real() > 0.0);
    // The smallness ratio grows with tau2 and stays tiny for short second lags.
    if (pt.tau2 <= 0.44) CHECK(pt.ratio <= 1e-15);
  }
  for (std::size_t i = 1; i < fine.points.size(); ++i) CHECK(fine.points[i].ratio > fine.points[i - 1].ratio);

  CHECK_THROWS_AS(hopf_scan(1, 1, 1, 10, 2.0, 1.0, 10), Error);
  CHECK_THROWS_AS(hopf_scan(1, 1, 1, 10, 0.1, 1.0, 1), Error);
}
