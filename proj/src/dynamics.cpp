#include "dde/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dde/error.hpp"

namespace dde {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton on P_n.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

// \int_{-lag}^{0} e^{-s (theta + lag)} phi(theta) d theta
complex history_integral(const HistoryFn& phi, complex s, double lag) {
  static const GaussLegendre rule(16);
  const int panels = static_cast<int>(std::ceil(lag / 0.25 + lag * std::abs(s) / 2.0));
  const double h = lag / panels;
  complex acc{0.0, 0.0};
  for (int k = 0; k < panels; ++k) {
    const double a = -lag + k * h;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double theta = a + 0.5 * h * (rule.nodes[i] + 1.0);
      acc += 0.5 * h * rule.weights[i] * std::exp(-s * (theta + lag)) * phi(theta);
    }
  }
  return acc;
}

class DelayedLookup {
 public:
  DelayedLookup(const HistoryFn& phi, const std::vector<double>& x, double dt)
      : phi_(phi), x_(x), dt_(dt) {}

  // x(u), u <= current time; x_ holds the solution at k * dt, k < x_.size().
  double operator()(double u) const {
    if (u <= 0.0) return phi_(u);
    const int last = static_cast<int>(x_.size()) - 1;
    const double pos = u / dt_;
    int start = static_cast<int>(std::floor(pos)) - 1;
    start = std::clamp(start, 0, std::max(0, last - 3));
    const int count = std::min(4, last + 1 - start);
    double acc = 0.0;
    for (int a = 0; a < count; ++a) {
      double basis = 1.0;
      for (int b = 0; b < count; ++b) {
        if (b == a) continue;
        basis *= (pos - (start + b)) / static_cast<double>(a - b);
      }
      acc += basis * x_[start + a];
    }
    return acc;
  }

 private:
  const HistoryFn& phi_;
  const std::vector<double>& x_;
  double dt_;
};

}  // namespace

HistoryFn constant_history(double value) {
  std::ostringstream tag;
  tag.precision(17);
  tag << "const:" << value;
  return {[value](double) { return value; }, tag.str()};
}

HistoryFn mode_history(complex s) {
  std::ostringstream tag;
  tag.precision(17);
  tag << "mode:" << s.real() << (s.imag() < 0 ? "" : "+") << s.imag() << "i";
  return {[s](double t) { return std::exp(s * t).real(); }, tag.str()};
}

Trajectory integrate_delay(const DelayRhs& rhs, std::span<const double> lags, const HistoryFn& phi,
                           double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw Error(Errc::invalid_argument, "T and dt must be positive");
  if (lags.empty()) throw Error(Errc::invalid_argument, "at least one lag is required");
  const double min_lag = *std::min_element(lags.begin(), lags.end());
  if (!(min_lag > 0.0)) throw Error(Errc::invalid_argument, "lags must be positive");
  if (dt > min_lag / 4.0) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds min(lags)/4 = " << min_lag / 4.0;
    throw Error(Errc::step_too_large, msg.str());
  }

  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  const double h = T / static_cast<double>(steps);

  Trajectory out;
  out.dt = h;
  out.t.reserve(steps + 1);
  out.x.reserve(steps + 1);
  out.t.push_back(0.0);
  out.x.push_back(phi(0.0));

  const DelayedLookup past(phi, out.x, h);
  std::vector<double> delayed(lags.size());
  const auto f = [&](double t, double x) {
    for (std::size_t i = 0; i < lags.size(); ++i) delayed[i] = past(t - lags[i]);
    return rhs(t, x, delayed);
  };

  for (std::size_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * h;
    const double x = out.x.back();
    const double k1 = f(t, x);
    const double k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const double k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const double k4 = f(t + h, x + h * k3);
    const double next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(next)) {
      std::ostringstream msg;
      msg << "state became non-finite at t = " << t + h;
      throw Error(Errc::non_finite, msg.str());
    }
    out.t.push_back(static_cast<double>(n + 1) * h);
    out.x.push_back(next);
  }
  return out;
}

Trajectory integrate_mos(const ModelParams& p, const HistoryFn& phi, double T, double dt) {
  if (!(p.tau1 > 0.0) || !(p.tau2 > 0.0)) throw Error(Errc::invalid_argument, "lags must be positive");
  const std::array<double, 2> lags{p.tau1, p.tau2};
  const DelayRhs rhs = [&p](double, double x, std::span<const double> d) {
    return p.alpha * x + p.beta * d[0] + p.gamma * d[1];
  };
  return integrate_delay(rhs, lags, phi, T, dt);
}

complex SpectralFit::evaluate(double t) const {
  complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < roots.size(); ++i) acc += coefficients[i] * std::exp(roots[i] * t);
  return acc;
}

SpectralFit spectral_fit(const ModelParams& p, const HistoryFn& phi, std::span<const Root> roots,
                         int n_samples, FitMethod method) {
  const auto n_roots = static_cast<int>(roots.size());
  if (n_roots == 0) throw Error(Errc::invalid_argument, "spectral_fit needs at least one root");
  for (int a = 0; a < n_roots; ++a) {
    for (int b = a + 1; b < n_roots; ++b) {
      const complex sa = roots[a].s_original;
      const complex sb = roots[b].s_original;
      if (std::abs(sa - sb) <= 1e-8 * std::max(1.0, std::abs(sa))) {
        std::ostringstream msg;
        msg << "roots of branches " << roots[a].j << " and " << roots[b].j << " coincide";
        throw Error(Errc::rank_deficient, msg.str());
      }
    }
  }
  if (n_samples == 0) n_samples = 4 * n_roots + 1;
  if (n_samples < n_roots) throw Error(Errc::invalid_argument, "n_samples must be >= number of roots");

  SpectralFit fit;
  fit.method = method;
  for (const Root& r : roots) {
    fit.branches.push_back(r.j);
    fit.roots.push_back(r.s_original);
  }

  const double window = std::max(p.tau1, p.tau2);
  std::vector<double> samples(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    samples[i] = n_samples == 1 ? 0.0 : -window + window * i / (n_samples - 1);
  }

  Eigen::MatrixXcd basis(n_samples, n_roots);
  Eigen::VectorXcd target(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    target(i) = phi(samples[i]);
    for (int j = 0; j < n_roots; ++j) basis(i, j) = std::exp(fit.roots[j] * samples[i]);
  }

  Eigen::VectorXcd coeffs(n_roots);
  if (method == FitMethod::least_squares) {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(basis);
    if (qr.rank() < n_roots) {
      throw Error(Errc::rank_deficient, "exponential basis is rank deficient on the history window");
    }
    coeffs = qr.solve(target);
  } else {
    const double phi0 = phi(0.0);
    for (int j = 0; j < n_roots; ++j) {
      const complex s = fit.roots[j];
      const complex numer = phi0 + p.beta * history_integral(phi, s, p.tau1) +
                            p.gamma * history_integral(phi, s, p.tau2);
      coeffs(j) = numer / char_derivative(p, s);
    }
  }
  fit.coefficients.assign(coeffs.data(), coeffs.data() + n_roots);
  fit.window_residual = (basis * coeffs - target).cwiseAbs().maxCoeff();
  return fit;
}

ModelParams blowfly_linearize(double r, double a1, double a2, double tau1, double tau2) {
  if (!(r > 0.0) || !(a1 > 0.0) || !(a2 > 0.0) || !(tau1 > 0.0) || !(tau2 > 0.0)) {
    throw Error(Errc::invalid_argument, "blowfly parameters must be positive");
  }
  const double x_star = 1.0 / (a1 + a2);
  return {0.0, -r * x_star * a1, -r * x_star * a2, tau1, tau2};
}

HopfConditions hopf_conditions(double r, double a1, double a2, double tau1) {
  HopfConditions c;
  const double x_star = 1.0 / (a1 + a2);
  c.equal_weights = std::abs(a1 - a2) <= 1e-12 * std::max(std::abs(a1), std::abs(a2));
  c.tau1_threshold = 1.0 / (2.0 * x_star * r * a1);
  c.tau1_condition = tau1 > c.tau1_threshold;
  return c;
}

std::optional<PrincipalRoot> principal_root(const ModelParams& p, const Truncation& t,
                                            std::optional<complex> continuation,
                                            const NewtonOptions& opts) {
  PrincipalRoot out;
  std::optional<complex> series_limit;
  try {
    const Root seed = root_series(p, 0, t);
    out.series_ok = true;
    out.series_residual = seed.residual;
    const NewtonResult refined = newton_refine(p, seed.s_original, opts);
    if (refined.status == NewtonStatus::converged) series_limit = refined.s;
  } catch (const Error&) {
    out.series_ok = false;
  }

  std::vector<complex> seeds = single_lag_seeds(p, 10);
  if (continuation) seeds.push_back(*continuation);
  if (series_limit) seeds.push_back(*series_limit);
  const std::vector<complex> found = refine_seeds(p, seeds, opts);
  if (found.empty()) return std::nullopt;

  out.s = found.front();
  if (series_limit) {
    // Conjugates share the real part; either counts as the series' root.
    const double tol = 1e-8 * std::max(1.0, std::abs(out.s));
    out.from_series = std::abs(*series_limit - out.s) <= tol ||
                      std::abs(std::conj(*series_limit) - out.s) <= tol;
  }
  return out;
}

HopfScanReport hopf_scan(double r, double a1, double a2, double tau1, double tau2_lo,
                         double tau2_hi, int n_grid, const Truncation& t) {
  if (!(tau2_lo < tau2_hi) || !(tau2_lo > 0.0)) {
    throw Error(Errc::invalid_argument, "tau2 range must satisfy 0 < lo < hi");
  }
  if (n_grid < 2) throw Error(Errc::invalid_argument, "scan grid needs >= 2 points");
  t.validate();

  HopfScanReport report;
  report.conditions = hopf_conditions(r, a1, a2, tau1);

  const auto evaluate = [&](double tau2, std::optional<complex> hint) {
    ScanPoint pt;
    pt.tau2 = tau2;
    pt.ratio = std::numeric_limits<double>::quiet_NaN();
    if (tau2 == tau1) return pt;
    const ModelParams p = blowfly_linearize(r, a1, a2, tau1, tau2);
    try {
      pt.ratio = assumption_diagnostics(reduce(p), 0).ratio;
    } catch (const Error&) {
    }
    if (const auto pr = principal_root(p, t, hint)) {
      pt.ok = true;
      pt.s0 = pr->s;
      pt.from_series = pr->from_series;
      pt.series_ok = pr->series_ok;
    }
    return pt;
  };

  std::optional<complex> hint;
  for (int i = 0; i < n_grid; ++i) {
    const double tau2 = tau2_lo + (tau2_hi - tau2_lo) * i / (n_grid - 1);
    ScanPoint pt = evaluate(tau2, hint);
    if (pt.ok) hint = pt.s0;
    report.points.push_back(pt);
  }

  for (std::size_t i = 0; i + 1 < report.points.size(); ++i) {
    const ScanPoint& a = report.points[i];
    const ScanPoint& b = report.points[i + 1];
    if (!a.ok || !b.ok) continue;
    const bool a_neg = a.s0.real() < 0.0;
    if (a_neg == (b.s0.real() < 0.0)) continue;

    double lo = a.tau2;
    double hi = b.tau2;
    complex s_lo = a.s0;
    ScanPoint mid_pt = b;
    // Bisect well past |Re s0| <= 1e-8 so the reported tau2 does not depend
    // on where the grid put the bracket.
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
      const double mid = 0.5 * (lo + hi);
      mid_pt = evaluate(mid, s_lo);
      if (!mid_pt.ok) break;
      if (mid_pt.s0.real() == 0.0) break;
      if ((mid_pt.s0.real() < 0.0) == a_neg) {
        lo = mid;
        s_lo = mid_pt.s0;
      } else {
        hi = mid;
      }
    }
    if (!mid_pt.ok || std::abs(mid_pt.s0.real()) > 1e-8) continue;
    report.crossings.push_back({mid_pt.tau2, mid_pt.s0, a.tau2, b.tau2, a_neg});
  }
  return report;
}

}  // namespace dde
