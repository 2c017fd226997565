#include "dde/lambert.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "dde/combinatorics.hpp"
#include "dde/error.hpp"

namespace dde {

namespace {

constexpr double kInvE = 0.36787944117144232159552377016146;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Rational make_rational(std::int64_t num, std::int64_t den) {
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  return {num / g, den / g};
}

// Shared sheet of W_0, W_{-1} (upper half) and W_1 (lower half) at -1/e.
// A signed zero imaginary part picks the side of the cut.
bool touches_branch_point(int j, complex x) {
  const bool upper = !std::signbit(x.imag());
  return j == 0 || (j == -1 && upper) || (j == 1 && !upper);
}

complex branch_point_guess(int j, complex x) {
  complex p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
  if (j != 0) p = -p;
  return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
}

const WBranchSeriesTerms& default_terms() {
  static const WBranchSeriesTerms terms(4, 4);
  return terms;
}

// Starting points in order of preference.
std::vector<complex> initial_guesses(int j, complex x) {
  std::vector<complex> out;
  if (touches_branch_point(j, x) && std::abs(x + kInvE) < 0.3) out.push_back(branch_point_guess(j, x));
  if (j == 0) {
    if (std::abs(x) < 0.3) out.push_back(lambert_w0_series(x, 30));
    if (x.real() > -kInvE && x.real() < 1.5 && std::abs(x.imag()) < 1.0) {
      // Pade approximant around the origin.
      out.push_back(x * (3.0 + 6.0 * x + x * x) / (3.0 + 9.0 * x + 5.0 * x * x));
    }
  }
  // The higher-order terms only help once |L1| is large; near the origin of
  // L1 they diverge and can push Halley onto a neighbouring branch.
  const complex L1 = std::log(x) + complex{0.0, kTwoPi * j};
  if (std::abs(L1) < 4.0) out.push_back(L1 - std::log(L1));
  out.push_back(default_terms().evaluate(j, x));
  if (touches_branch_point(j, x)) out.push_back(branch_point_guess(j, x));
  return out;
}

// Necessary condition on Im W_j: the strip that contains the branch's range.
bool in_branch_strip(int j, complex w) {
  const double y = w.imag();
  const double slack = 1e-9 * (1.0 + std::abs(y));
  const double pi = std::numbers::pi;
  if (j == 0) return std::abs(y) <= pi + slack;
  if (j > 0) return y >= 2.0 * (j - 1) * pi - slack && y <= (2.0 * j + 1.0) * pi + slack;
  return y >= (2.0 * j - 1.0) * pi - slack && y <= 2.0 * (j + 1) * pi + slack;
}

LambertResult halley(complex x, complex w) {
  LambertResult out;
  const double tol = 1e-12 * std::abs(x);
  for (int it = 0; it < 100; ++it) {
    const complex ew = std::exp(w);
    const complex f = w * ew - x;
    if (std::abs(f) <= tol) {
      out.converged = true;
      break;
    }
    const complex wp1 = w + 1.0;
    if (std::abs(wp1) < std::numeric_limits<double>::epsilon()) break;
    const complex dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= dw;
    out.iterations = it + 1;
    if (std::abs(dw) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) {
      out.converged = std::abs(w * std::exp(w) - x) <= tol;
      break;
    }
  }
  out.w = w;
  return out;
}

}  // namespace

WBranchSeriesTerms::WBranchSeriesTerms(int l_max, int m_max) : l_max_(l_max), m_max_(m_max) {
  if (l_max < 0 || m_max < 1) throw Error(Errc::invalid_argument, "W series needs l_max >= 0, m_max >= 1");
  table_.reserve(static_cast<std::size_t>((l_max + 1) * m_max));
  for (int l = 0; l <= l_max; ++l) {
    for (int m = 1; m <= m_max; ++m) {
      std::int64_t den = 1;
      for (int i = 2; i <= m; ++i) den *= i;
      const auto stirling = static_cast<std::int64_t>(stirling1_unsigned(l + m, l + 1));
      table_.push_back(make_rational(l % 2 == 0 ? stirling : -stirling, den));
    }
  }
}

const Rational& WBranchSeriesTerms::coefficient(int l, int m) const {
  if (l < 0 || l > l_max_ || m < 1 || m > m_max_) {
    throw Error(Errc::invalid_argument, "W series coefficient index out of range");
  }
  return table_[static_cast<std::size_t>(l * m_max_ + (m - 1))];
}

complex WBranchSeriesTerms::evaluate(int j, complex x) const {
  const complex L1 = std::log(x) + complex{0.0, kTwoPi * j};
  const complex L2 = std::log(L1);
  complex acc = L1 - L2;
  const complex inv_L1 = 1.0 / L1;
  complex inv_pow_l{1.0, 0.0};  // L1^{-l}
  for (int l = 0; l <= l_max_; ++l) {
    complex ratio_pow{1.0, 0.0};  // (L2 / L1)^m
    for (int m = 1; m <= m_max_; ++m) {
      ratio_pow *= L2 * inv_L1;
      acc += coefficient(l, m).value() * ratio_pow * inv_pow_l;
    }
    inv_pow_l *= inv_L1;
  }
  return acc;
}

complex lambert_w0_series(complex x, int terms) {
  complex acc{0.0, 0.0};
  complex xn{1.0, 0.0};
  for (int n = 1; n <= terms; ++n) {
    xn *= x;
    // (-n)^{n-1} / n! in log form
    const double mag = std::exp((n - 1) * std::log(static_cast<double>(n)) - std::lgamma(n + 1.0));
    acc += ((n - 1) % 2 == 0 ? mag : -mag) * xn;
  }
  return acc;
}

LambertResult lambert_w_ex(int j, complex x) {
  LambertResult out;
  if (x == complex{0.0, 0.0}) {
    if (j != 0) throw Error(Errc::invalid_argument, "W_j(0) is singular for j != 0");
    out.converged = true;
    return out;
  }
  const bool near_branch_point = (j == 0 || j == -1 || j == 1) && std::abs(x + kInvE) < 1e-6;

  // Halley can converge onto a neighbouring branch from a poor guess; fall
  // back to the next guess when the result leaves branch j's strip.
  const std::vector<complex> guesses = initial_guesses(j, x);
  int total = 0;
  for (std::size_t g = 0; g < guesses.size(); ++g) {
    LambertResult attempt = halley(x, guesses[g]);
    total += attempt.iterations;
    if (g == 0 || (attempt.converged && in_branch_strip(j, attempt.w))) out = attempt;
    if (out.converged && in_branch_strip(j, out.w)) break;
  }
  out.iterations = total;
  out.near_branch_point = near_branch_point;
  complex w = out.w;
  // W_0 on [-1/e, inf) is real, as is W_{-1} (W_1 below the cut) on [-1/e, 0).
  const bool upper = !std::signbit(x.imag());
  if (x.imag() == 0.0 && x.real() >= -kInvE &&
      (j == 0 || (x.real() < 0.0 && ((j == -1 && upper) || (j == 1 && !upper))))) {
    w.imag(0.0);
  }
  out.w = w;
  return out;
}

complex lambert_w(int j, complex x) { return lambert_w_ex(j, x).w; }

complex single_lag_root(double alpha, double beta, double tau, int j) {
  if (beta == 0.0) throw Error(Errc::invalid_argument, "beta == 0: no delayed term");
  if (!(tau > 0.0)) throw Error(Errc::invalid_argument, "tau must be positive");
  const complex x{beta * tau * std::exp(-alpha * tau), 0.0};
  return lambert_w(j, x) / tau + alpha;
}

}  // namespace dde
