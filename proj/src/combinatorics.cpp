#include "dde/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dde/error.hpp"

namespace dde {

long double rising_factorial(int m, int k) {
  long double acc = 1.0L;
  for (int i = 0; i < k; ++i) acc *= static_cast<long double>(m + i);
  return acc;
}

double log_rising_over_factorial(int m, int k) {
  if (k == 0) return 0.0;
  // Binomial C(m+k-1, m-1) as a product over the smaller index; lgamma
  // differences lose ~1e-14 once k is large.
  const int small = std::min(m - 1, k);
  if (small <= 64) {
    const double big = std::max(m - 1, k);
    double acc = 0.0;
    for (int i = 1; i <= small; ++i) acc += std::log1p(big / i);
    return acc;
  }
  return std::lgamma(static_cast<double>(m + k)) - std::lgamma(static_cast<double>(m)) -
         std::lgamma(static_cast<double>(k + 1));
}

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  if (n <= 60) {
    // Exact: each partial product C(n-k+i, i) is an integer below 2^63.
    std::uint64_t acc = 1;
    for (int i = 1; i <= k; ++i) acc = acc * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return static_cast<double>(acc);
  }
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

complex bell_partial(int l, int p, std::span<const complex> x) {
  if (l == 0 && p == 0) return {1.0, 0.0};
  if (l < 0 || p < 0 || l < p || p == 0) return {0.0, 0.0};
  const int width = l - p;  // only states (i, k) with i - k <= width are reachable
  if (static_cast<int>(x.size()) < width + 1) {
    std::ostringstream msg;
    msg << "bell_partial(" << l << ", " << p << ") needs " << width + 1 << " entries, got "
        << x.size();
    throw Error(Errc::sequence_too_short, msg.str());
  }
  // row[k][d] = B_{k+d, k}, d = 0..width
  std::vector<std::vector<complex>> row(p + 1, std::vector<complex>(width + 1));
  row[0][0] = 1.0;
  for (int k = 1; k <= p; ++k) {
    for (int d = 0; d <= width; ++d) {
      const int i = k + d;
      complex acc{0.0, 0.0};
      for (int r = 1; r <= d + 1; ++r) {
        // B_{i-r, k-1} sits at offset (i - r) - (k - 1) = d + 1 - r.
        acc += binomial(i - 1, r - 1) * x[r - 1] * row[k - 1][d + 1 - r];
      }
      row[k][d] = acc;
    }
  }
  return row[p][width];
}

std::uint64_t stirling1_unsigned(int n, int k) {
  if (n < 0 || k < 0) return 0;
  if (n == 0) return k == 0 ? 1 : 0;
  if (k == 0 || k > n) return 0;
  // s(i+1, j) = i s(i, j) + s(i, j-1)
  std::vector<std::uint64_t> prev(n + 1, 0), next(n + 1, 0);
  prev[0] = 1;
  for (int i = 0; i < n; ++i) {
    next[0] = 0;
    for (int j = 1; j <= i + 1; ++j) {
      std::uint64_t scaled = 0;
      std::uint64_t sum = 0;
      if (__builtin_mul_overflow(static_cast<std::uint64_t>(i), prev[j], &scaled) ||
          __builtin_add_overflow(scaled, prev[j - 1], &sum)) {
        std::ostringstream msg;
        msg << "stirling1_unsigned(" << n << ", " << k << ") exceeds 64 bits";
        throw Error(Errc::invalid_argument, msg.str());
      }
      next[j] = sum;
    }
    std::swap(prev, next);
  }
  return prev[k];
}

DerivativeSequence::DerivativeSequence(std::function<complex(int)> nth) : nth_(std::move(nth)) {}

complex DerivativeSequence::operator()(int n) const {
  if (n < 1) throw Error(Errc::invalid_argument, "derivative order must be >= 1");
  return prefix(n)[n - 1];
}

std::span<const complex> DerivativeSequence::prefix(int n) const {
  if (n <= 0) return {};
  while (static_cast<int>(values_.size()) < n) {
    values_.push_back(nth_(static_cast<int>(values_.size()) + 1));
  }
  return std::span<const complex>(values_).first(static_cast<std::size_t>(n));
}

namespace {

// Shared by the memoized and plain entry points so both perform the same
// floating-point operations in the same order.
template <typename Recurse>
complex bell_deriv_step(int l, int p, int q, const DerivativeSequence& f, Recurse&& recurse) {
  if (l < 0 || p < 0 || (p == 0 && l > 0) || l < p) return {0.0, 0.0};
  if (q == 0) return bell_partial(l, p, f.prefix(l - p + 1));
  complex outer{0.0, 0.0};
  for (int r = 1; r <= l - p + 1; ++r) {
    complex inner{0.0, 0.0};
    for (int s = 0; s <= q - 1; ++s) {
      inner += binomial(q - 1, s) * recurse(l - r, p - 1, q - 1 - s) * f(1 + r + s);
    }
    outer += binomial(l, r) * inner;
  }
  return outer;
}

}  // namespace

complex BellDerivativeTable::operator()(int l, int p, int q) {
  const BellKey key{l, p, q};
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  const complex value = bell_deriv_step(l, p, q, *f_, [this](int a, int b, int c) {
    return (*this)(a, b, c);
  });
  memo_.emplace(key, value);
  return value;
}

complex bell_deriv(int l, int p, int q, const DerivativeSequence& f) {
  return bell_deriv_step(l, p, q, f, [&f](int a, int b, int c) { return bell_deriv(a, b, c, f); });
}

}  // namespace dde
