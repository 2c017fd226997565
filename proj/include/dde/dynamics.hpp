#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dde/model.hpp"
#include "dde/oracle.hpp"
#include "dde/series.hpp"

namespace dde {

/// Initial history x(t) = phi(t) for t <= 0.
struct HistoryFn {
  std::function<double(double)> eval;
  std::string tag;

  double operator()(double t) const { return eval(t); }
};

HistoryFn constant_history(double value);
/// Re e^{s t}, the history carried by a single real-time mode.
HistoryFn mode_history(complex s);

struct Trajectory {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<double> x;
};

/// Right-hand side of a scalar DDE with delayed states: f(t, x(t), {x(t - lag_i)}).
using DelayRhs = std::function<double(double, double, std::span<const double>)>;

/// Fixed-step classical RK4 for x'(t) = f(t, x(t), x(t - lags...)). Delayed
/// values come from the history for arguments <= 0 and from cubic Lagrange
/// interpolation of the stored solution otherwise. Requires dt <= min(lags)/4.
Trajectory integrate_delay(const DelayRhs& rhs, std::span<const double> lags, const HistoryFn& phi,
                           double T, double dt);

/// The linear two-lag problem through integrate_delay.
Trajectory integrate_mos(const ModelParams& p, const HistoryFn& phi, double T, double dt);

enum class FitMethod {
  least_squares,  // collocation / least squares on the history window
  residue,        // Laplace-transform residues at each root
};

struct SpectralFit {
  std::vector<int> branches;
  std::vector<complex> roots;  // original time
  std::vector<complex> coefficients;
  double window_residual = 0.0;  // max |sum C_j e^{s_j t_i} - phi(t_i)| over the samples
  FitMethod method = FitMethod::least_squares;

  [[nodiscard]] complex evaluate(double t) const;
};

/// Fits x(t) = sum_j C_j e^{s_j t}. With least_squares the samples are
/// n_samples equispaced points of [-max(tau1, tau2), 0] (n_samples equal to the
/// root count gives square collocation; 0 selects 4 * roots + 1). With
/// residue, C_j = P(s_j) / Delta'(s_j) where P collects phi(0) and the
/// history integrals of the Laplace-transformed equation.
/// Throws Errc::rank_deficient naming the pair of nearly coincident roots.
SpectralFit spectral_fit(const ModelParams& p, const HistoryFn& phi, std::span<const Root> roots,
                         int n_samples = 0, FitMethod method = FitMethod::least_squares);

/// Linearization of x' = r x (1 - a1 x(t - tau1) - a2 x(t - tau2)) about
/// x* = 1/(a1 + a2): (alpha, beta, gamma) = (0, -r x* a1, -r x* a2).
ModelParams blowfly_linearize(double r, double a1, double a2, double tau1, double tau2);

/// Hypotheses of the equal-weight Hopf theorem: a1 == a2 and tau1 > 1/(2 x* r a1).
struct HopfConditions {
  bool equal_weights = false;
  bool tau1_condition = false;
  double tau1_threshold = 0.0;
};
HopfConditions hopf_conditions(double r, double a1, double a2, double tau1);

/// Rightmost root of p from the branch-0 series seed, an optional
/// continuation seed and the single-lag Lambert seeds, all Newton-refined.
struct PrincipalRoot {
  complex s;                  // original time
  bool from_series = false;   // the series seed itself refined to s
  bool series_ok = false;     // the branch-0 series could be evaluated
  double series_residual = 0.0;
};
std::optional<PrincipalRoot> principal_root(const ModelParams& p, const Truncation& t,
                                            std::optional<complex> continuation = std::nullopt,
                                            const NewtonOptions& opts = {});

struct ScanPoint {
  double tau2 = 0.0;
  bool ok = false;  // a principal root was found
  complex s0;
  bool from_series = false;
  bool series_ok = false;
  double ratio = 0.0;  // assumption ratio at this tau2 (NaN if the reduction failed)
};

struct HopfCrossing {
  double tau2 = 0.0;
  complex s0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  bool destabilizing = false;  // Re s0 goes from negative to positive as tau2 grows
};

struct HopfScanReport {
  HopfConditions conditions;
  std::vector<ScanPoint> points;
  std::vector<HopfCrossing> crossings;
};

/// Re s0(tau2) on an n_grid-point grid of [tau2_lo, tau2_hi]; every sign change
/// is bisected until |Re s0| <= 1e-8.
HopfScanReport hopf_scan(double r, double a1, double a2, double tau1, double tau2_lo,
                         double tau2_hi, int n_grid, const Truncation& t = {});

}  // namespace dde
