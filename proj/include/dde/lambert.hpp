#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace dde {

using complex = std::complex<double>;

/// Exact rational num/den with den > 0, reduced.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  bool operator==(const Rational&) const = default;
  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Coefficients of the large-argument branch expansion
///   W_j(x) = L1 - L2 + sum_{l>=0} sum_{m>=1} C_lm L2^m / L1^{l+m},
///   L1 = ln x + 2 pi i j,  L2 = ln L1,
/// with C_lm = (-1)^l [l+m, l+1] / m!.
class WBranchSeriesTerms {
 public:
  WBranchSeriesTerms(int l_max, int m_max);

  [[nodiscard]] int l_max() const noexcept { return l_max_; }
  [[nodiscard]] int m_max() const noexcept { return m_max_; }
  [[nodiscard]] const Rational& coefficient(int l, int m) const;

  /// The truncated expansion on branch j. x != 0.
  [[nodiscard]] complex evaluate(int j, complex x) const;

 private:
  int l_max_;
  int m_max_;
  std::vector<Rational> table_;  // (l, m) at l * m_max + (m - 1)
};

/// Truncated principal series sum_{n=1}^{terms} (-n)^{n-1} x^n / n!.
complex lambert_w0_series(complex x, int terms);

struct LambertResult {
  complex w;
  int iterations = 0;
  bool converged = false;
  bool near_branch_point = false;  // |x + 1/e| small on branches 0 / -1
};

/// W_j(x): a series initial guess followed by Halley iteration until
/// |w e^w - x| <= 1e-12 |x| (or the step stalls at rounding level).
LambertResult lambert_w_ex(int j, complex x);

/// Value-only form; throws dde::Error when x == 0 on a branch j != 0.
complex lambert_w(int j, complex x);

/// s = W_j(beta tau e^{-alpha tau}) / tau + alpha, the j-th root of
/// s = alpha + beta e^{-s tau}. Rejects beta == 0 and tau <= 0.
complex single_lag_root(double alpha, double beta, double tau, int j);

}  // namespace dde
