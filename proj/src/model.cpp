#include "dde/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dde/error.hpp"

namespace dde {

namespace {

bool all_finite(std::initializer_list<double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void ModelParams::validate() const {
  if (!all_finite({alpha, beta, gamma, tau1, tau2})) {
    throw Error(Errc::invalid_argument, "model parameters must be finite");
  }
  if (!(tau1 > 0.0) || !(tau2 > 0.0)) {
    throw Error(Errc::invalid_argument, "lags must be positive");
  }
  if (tau1 == tau2) {
    throw Error(Errc::coincident_lags,
                "tau1 == tau2: merge the delayed terms into a single-lag problem");
  }
}

void Truncation::validate() const {
  if (m_max < 1) throw Error(Errc::invalid_argument, "m_max must be >= 1");
  if (k_max < 0) throw Error(Errc::invalid_argument, "k_max must be >= 0");
}

ReducedParams reduce(const ModelParams& p) {
  p.validate();
  if (p.gamma == 0.0) {
    throw Error(Errc::single_lag_degenerate,
                "gamma == 0 leaves a single-lag problem; use the Lambert W solver");
  }
  ReducedParams r;
  r.alpha1 = p.alpha * p.tau1;
  r.beta1 = p.beta * p.tau1;
  r.gamma1 = p.gamma * p.tau1;
  r.tau = p.tau2 / p.tau1;
  r.beta2 = r.beta1 * std::exp(-r.alpha1);
  r.gamma2 = r.gamma1 * std::exp(-r.alpha1 * r.tau);
  if (r.gamma2 == 0.0 || !std::isfinite(r.gamma2) || !std::isfinite(r.beta2)) {
    throw Error(Errc::non_finite, "reduced coefficients under/overflow");
  }
  return r;
}

ModelParams from_reduced(double alpha1, double beta2, double gamma2, double tau) {
  ModelParams p;
  p.alpha = alpha1;
  p.beta = beta2 * std::exp(alpha1);
  p.gamma = gamma2 * std::exp(alpha1 * tau);
  p.tau1 = 1.0;
  p.tau2 = tau;
  return p;
}

complex branch_log(complex z, int j) {
  if (z == complex{0.0, 0.0}) {
    throw Error(Errc::invalid_argument, "branch_log of zero");
  }
  return {std::log(std::abs(z)), std::arg(z) + 2.0 * std::numbers::pi * j};
}

BranchQuantities branch_quantities(const ReducedParams& r, int j) {
  BranchQuantities b;
  b.j = j;
  b.L = branch_log(complex{r.gamma2, 0.0}, j);
  if (b.L == complex{0.0, 0.0}) {
    std::ostringstream msg;
    msg << "ln_" << j << "(gamma2) == 0 (gamma2 = 1 on branch 0)";
    throw Error(Errc::singular_branch, msg.str());
  }
  b.sigma = 1.0 / b.L;
  const complex log_inv_L = std::log(1.0 / b.L);
  const double log_tau = std::log(r.tau);
  // The power is taken on the same sheet as L so that c e^{-v/tau} reproduces
  // the beta2 term of the characteristic equation on every branch.
  const complex exponent = ((r.tau - 1.0) / r.tau) * (b.L + log_tau + log_inv_L);
  b.c = r.beta2 == 0.0 ? complex{0.0, 0.0} : (r.beta2 / r.gamma2) * std::exp(exponent);
  b.mu = (log_tau + log_inv_L) / b.L - b.c;
  return b;
}

AssumptionDiagnostics assumption_diagnostics(const ReducedParams& r, int j) {
  const BranchQuantities b = branch_quantities(r, j);
  AssumptionDiagnostics d;
  if (r.beta2 != 0.0) {
    // |gamma2^{1/tau}| under the principal power is |gamma2|^{1/tau}; stay in
    // log space since 1/tau can be large.
    d.ratio = std::exp(std::log(std::abs(r.beta2)) - std::log(std::abs(r.gamma2)) / r.tau -
                       std::log(std::abs(b.L)));
  }
  d.mu_abs = std::abs(b.mu);
  d.sigma_abs = std::abs(b.sigma);
  d.advisable = d.ratio < 0.1 && d.mu_abs < 0.5 && d.sigma_abs < 1.0;
  return d;
}

complex rescaled_residual(const ReducedParams& r, complex s) {
  return s - r.alpha1 - r.beta1 * std::exp(-s) - r.gamma1 * std::exp(-s * r.tau);
}

}  // namespace dde
