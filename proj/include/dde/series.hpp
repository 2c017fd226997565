#pragma once

#include <complex>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "dde/combinatorics.hpp"
#include "dde/model.hpp"

namespace dde {

/// A characteristic root tagged with the branch that produced it.
struct Root {
  int j = 0;
  complex s_rescaled;  // root of s = alpha1 + beta1 e^{-s} + gamma1 e^{-s tau}
  complex s_original;  // s_rescaled / tau1
  complex v;
  double residual = 0.0;  // |rescaled characteristic function at s_rescaled|
  AssumptionDiagnostics diagnostics;
};

/// i-th derivative at zero of f2(w) = e^{-w} + c e^{-w/tau} - 1 - c:
/// (-1)^i (1 + c tau^{-i}), i >= 1.
complex f2_deriv(int i, complex c, double tau);

/// Coefficients h_{m,k} of the double series for one (c, tau) pair.
///
/// The Bell-polynomial products entering the triple sum over (l, p, q) do not
/// depend on k. They are cached on first use for each m, so evaluating a whole
/// column h_{m,0..K} costs one Bell evaluation plus K cheap updates.
class HmkEvaluator {
 public:
  HmkEvaluator(complex c, double tau);
  HmkEvaluator(const HmkEvaluator&) = delete;
  HmkEvaluator& operator=(const HmkEvaluator&) = delete;

  /// Triple-sum numerator of h_{m,k} (before dividing by f2'(0)^{2m+k-1}).
  complex numerator(int m, int k);

  complex operator()(int m, int k);

  /// k-independent part of the (l, p) block for fixed m:
  ///   sum_q (-1)^p (m-1)! (m-p-1)! / (q! l! (m-l-1)! (2m-2-l-q)!) B_{2m-2-l-q, m-1-p} B^{(q)}_{l,p}
  /// Indexed [l][p]. The full coefficient multiplies this by
  ///   (k+m) Gamma(k+m+p) / Gamma(k+l+2).
  const std::vector<std::vector<complex>>& block_sums(int m);

  [[nodiscard]] complex c() const noexcept { return c_; }
  [[nodiscard]] double tau() const noexcept { return tau_; }
  /// f2'(0) = -(1 + c / tau)
  [[nodiscard]] complex first_derivative() const noexcept { return d1_; }

 private:
  complex c_;
  double tau_;
  complex d1_;
  DerivativeSequence derivs_;
  BellDerivativeTable bell_derivs_;
  std::map<int, std::vector<std::vector<complex>>> blocks_;
};

/// Uncached convenience form of HmkEvaluator(c, tau)(m, k).
complex h_mk(int m, int k, complex c, double tau);

/// sum_{k=0}^{k_max} sum_{m=1}^{m_max} m^{rising k} h_{m,k} mu^m sigma^k / (m! k!).
///
/// Each term is assembled as a complex logarithm (rising factorial, Gamma
/// ratio, sigma^k, mu^m and the f2'(0) power) and exponentiated once, so
/// k_max in the thousands does not overflow. Terms are summed per m over
/// ascending k with compensated summation. Throws Errc::non_finite naming
/// (m, k) if a term overflows anyway.
complex v_series(const BranchQuantities& b, double tau, const Truncation& t);

/// Same sum evaluated term by term through h_mk and direct powers. Only
/// usable while nothing overflows (moderate k); kept as a cross-check.
complex v_series_direct(const BranchQuantities& b, double tau, const Truncation& t);

/// s_rescaled = (L + ln(1/L) + ln tau + v) / tau + alpha1, principal outer logs.
complex assemble_root(const BranchQuantities& b, const ReducedParams& r, complex v);

/// v recovered from a rescaled root on branch b: tau (s - alpha1) - L - ln(1/L) - ln tau.
complex recover_v(const BranchQuantities& b, const ReducedParams& r, complex s_rescaled);

/// Branch-j root from the truncated series. The residual is reported, not
/// enforced; refinement is a separate step (see oracle.hpp).
Root root_series(const ModelParams& p, int j, const Truncation& t = {});

}  // namespace dde
