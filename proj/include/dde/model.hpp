#pragma once

#include <complex>

namespace dde {

using complex = std::complex<double>;

/// Coefficients of  x'(t) = alpha x(t) + beta x(t - tau1) + gamma x(t - tau2)
/// in original time units.
struct ModelParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double tau1 = 1.0;
  double tau2 = 1.0;

  /// Throws dde::Error when a lag is non-positive or the lags coincide.
  void validate() const;
};

/// The problem after rescaling time by the first lag:
///   s = alpha1 + beta1 e^{-s} + gamma1 e^{-s tau},  tau = tau2 / tau1,
/// together with the shifted coefficients beta2 = beta1 e^{-alpha1} and
/// gamma2 = gamma1 e^{-alpha1 tau} of  lambda e^{lambda tau} = beta2 e^{(tau-1) lambda} + gamma2.
struct ReducedParams {
  double alpha1 = 0.0;
  double beta1 = 0.0;
  double gamma1 = 0.0;
  double tau = 1.0;
  double beta2 = 0.0;
  double gamma2 = 0.0;
};

/// Per-branch inputs of the v expansion.
struct BranchQuantities {
  int j = 0;
  complex L;      // ln_j(gamma2)
  complex sigma;  // 1 / L
  complex c;
  complex mu;
};

struct Truncation {
  int m_max = 8;
  int k_max = 1000;

  void validate() const;
};

struct AssumptionDiagnostics {
  double ratio = 0.0;  // |beta2 / (gamma2^{1/tau} L)|
  double mu_abs = 0.0;
  double sigma_abs = 0.0;
  bool advisable = false;
};

ReducedParams reduce(const ModelParams& p);

/// Builds a problem with tau1 = 1 whose reduction is (alpha1, beta2, gamma2, tau).
ModelParams from_reduced(double alpha1, double beta2, double gamma2, double tau);

/// ln|z| + i (Arg z + 2 pi j), Arg in (-pi, pi].
complex branch_log(complex z, int j);

BranchQuantities branch_quantities(const ReducedParams& r, int j);

/// Advisory smallness checks for the expansion; never throws beyond
/// branch_quantities' own errors.
AssumptionDiagnostics assumption_diagnostics(const ReducedParams& r, int j);

/// s - alpha1 - beta1 e^{-s} - gamma1 e^{-s tau}
complex rescaled_residual(const ReducedParams& r, complex s_rescaled);

}  // namespace dde
