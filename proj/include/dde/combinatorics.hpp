#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

namespace dde {

using complex = std::complex<double>;

/// m (m+1) ... (m+k-1); overflows to inf for large arguments, use
/// log_rising_over_factorial there.
long double rising_factorial(int m, int k);

/// ln(m^{rising k} / k!) = ln C(m+k-1, k).
double log_rising_over_factorial(int m, int k);

/// Binomial coefficient as a double; zero outside 0 <= k <= n.
double binomial(int n, int k);

/// Partial Bell polynomial B_{l,p}(x_1, ..., x_{l-p+1}) by the standard
/// recurrence. `x[0]` holds x_1. Throws Errc::sequence_too_short when
/// l >= p >= 1 and x has fewer than l-p+1 entries.
complex bell_partial(int l, int p, std::span<const complex> x);

/// Unsigned Stirling number of the first kind [n k]. Exact; throws when
/// the value does not fit in 64 bits (n > 20).
std::uint64_t stirling1_unsigned(int n, int k);

/// The derivatives f^{(n)}(0), n = 1, 2, ..., of some analytic f. Values are
/// produced on demand and cached; the cache is not shared across threads.
class DerivativeSequence {
 public:
  explicit DerivativeSequence(std::function<complex(int)> nth);

  /// f^{(n)}(0) for n >= 1.
  complex operator()(int n) const;

  /// (f'(0), ..., f^{(n)}(0)); empty for n <= 0.
  std::span<const complex> prefix(int n) const;

 private:
  std::function<complex(int)> nth_;
  mutable std::vector<complex> values_;
};

struct BellKey {
  int l = 0;
  int p = 0;
  int q = 0;

  bool operator==(const BellKey&) const = default;
};

struct BellKeyHash {
  std::size_t operator()(const BellKey& k) const noexcept {
    auto h = static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.l));
    h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(k.p);
    h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(k.q);
    return static_cast<std::size_t>(h);
  }
};

/// q-th derivative at w = 0 of  w -> B_{l,p}(f'(w), ..., f^{(l-p+1)}(w)).
///
/// Uses d/dx_r B_{l,p} = C(l, r) B_{l-r,p-1} and the Leibniz rule:
///   B^{(q)}_{l,p} = sum_{r=1}^{l-p+1} C(l,r) sum_{s=0}^{q-1} C(q-1,s) B^{(q-1-s)}_{l-r,p-1} f^{(1+r+s)}(0)
/// with B^{(0)}_{l,p} the plain partial Bell polynomial on (f'(0), ...).
/// Results are memoized per instance; one table belongs to one derivative
/// sequence and one thread.
class BellDerivativeTable {
 public:
  explicit BellDerivativeTable(const DerivativeSequence& f) : f_(&f) {}

  complex operator()(int l, int p, int q);

  [[nodiscard]] std::size_t size() const noexcept { return memo_.size(); }

 private:
  const DerivativeSequence* f_;
  std::unordered_map<BellKey, complex, BellKeyHash> memo_;
};

/// Same recursion as BellDerivativeTable without the memo.
complex bell_deriv(int l, int p, int q, const DerivativeSequence& f);

}  // namespace dde
