#include "dde/series.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dde/error.hpp"

namespace dde {

namespace {

// Largest argument for which exp() stays finite.
constexpr double kMaxExpArg = 709.78;

long double factorial(int n) {
  long double acc = 1.0L;
  for (int i = 2; i <= n; ++i) acc *= static_cast<long double>(i);
  return acc;
}

// (m-1)! (m-p-1)! / (q! l! (m-l-1)! (2m-2-l-q)!)
double block_weight(int m, int l, int p, int q) {
  const long double num = factorial(m - 1) * factorial(m - p - 1);
  const long double den =
      factorial(q) * factorial(l) * factorial(m - l - 1) * factorial(2 * m - 2 - l - q);
  return static_cast<double>(num / den);
}

struct KahanSum {
  complex sum{0.0, 0.0};
  complex carry{0.0, 0.0};

  void add(complex x) {
    const complex y = x - carry;
    const complex t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

[[noreturn]] void throw_overflow(int m, int k) {
  std::ostringstream msg;
  msg << "series term (m=" << m << ", k=" << k << ") is not finite";
  throw Error(Errc::non_finite, msg.str());
}

}  // namespace

complex f2_deriv(int i, complex c, double tau) {
  const double sign = (i % 2 == 0) ? 1.0 : -1.0;
  return sign * (1.0 + c * std::pow(tau, -static_cast<double>(i)));
}

HmkEvaluator::HmkEvaluator(complex c, double tau)
    : c_(c),
      tau_(tau),
      d1_(f2_deriv(1, c, tau)),
      derivs_([c, tau](int n) { return f2_deriv(n, c, tau); }),
      bell_derivs_(derivs_) {}

const std::vector<std::vector<complex>>& HmkEvaluator::block_sums(int m) {
  if (auto it = blocks_.find(m); it != blocks_.end()) return it->second;
  std::vector<std::vector<complex>> blocks(m);
  for (int l = 0; l < m; ++l) {
    blocks[l].assign(l + 1, complex{0.0, 0.0});
    for (int p = 0; p <= l; ++p) {
      const double sign = (p % 2 == 0) ? 1.0 : -1.0;
      complex acc{0.0, 0.0};
      for (int q = 0; q <= 2 * m - 2 - l; ++q) {
        const int outer_l = 2 * m - 2 - l - q;
        const int outer_p = m - 1 - p;
        const int len = std::max(0, m - l - q + p);
        const complex outer = bell_partial(outer_l, outer_p, derivs_.prefix(len));
        if (outer == complex{0.0, 0.0}) continue;
        acc += block_weight(m, l, p, q) * outer * bell_derivs_(l, p, q);
      }
      blocks[l][p] = sign * acc;
    }
  }
  return blocks_.emplace(m, std::move(blocks)).first->second;
}

complex HmkEvaluator::numerator(int m, int k) {
  if (m < 1 || k < 0) throw Error(Errc::invalid_argument, "h_mk needs m >= 1, k >= 0");
  const auto& blocks = block_sums(m);
  complex acc{0.0, 0.0};
  for (int l = 0; l < m; ++l) {
    for (int p = 0; p <= l; ++p) {
      // (k+m) Gamma(k+m+p) / Gamma(k+l+2)
      const double kdep = std::exp(std::log(static_cast<double>(k + m)) +
                                   std::lgamma(static_cast<double>(k + m + p)) -
                                   std::lgamma(static_cast<double>(k + l + 2)));
      acc += kdep * blocks[l][p];
    }
  }
  return acc;
}

complex HmkEvaluator::operator()(int m, int k) {
  const complex num = numerator(m, k);
  return num * std::exp(-static_cast<double>(2 * m + k - 1) * std::log(d1_));
}

complex h_mk(int m, int k, complex c, double tau) {
  HmkEvaluator ev(c, tau);
  return ev(m, k);
}

complex v_series(const BranchQuantities& b, double tau, const Truncation& t) {
  t.validate();
  if (!(tau > 0.0)) throw Error(Errc::invalid_argument, "tau must be positive");
  if (!std::isfinite(b.c.real()) || !std::isfinite(b.c.imag()) || !std::isfinite(b.mu.real()) ||
      !std::isfinite(b.mu.imag()) || !std::isfinite(b.sigma.real()) ||
      !std::isfinite(b.sigma.imag())) {
    throw Error(Errc::non_finite, "branch quantities are not finite");
  }
  if (b.mu == complex{0.0, 0.0}) return {0.0, 0.0};

  HmkEvaluator ev(b.c, tau);
  const complex d1 = ev.first_derivative();
  if (d1 == complex{0.0, 0.0}) throw Error(Errc::non_finite, "f2'(0) vanishes (c == -tau)");

  const complex log_mu = std::log(b.mu);
  const complex log_d1 = std::log(d1);
  const bool sigma_zero = b.sigma == complex{0.0, 0.0};
  const complex log_ratio = sigma_zero ? complex{0.0, 0.0} : std::log(b.sigma) - log_d1;
  const int k_last = sigma_zero ? 0 : t.k_max;

  KahanSum total;
  for (int m = 1; m <= t.m_max; ++m) {
    const auto& blocks = ev.block_sums(m);

    // Nonzero (l, p) blocks with their running log of
    //   C(m+k-1, k) (k+m) Gamma(k+m+p) / Gamma(k+l+2).
    struct Block {
      complex weight;
      int l;
      int p;
      double log_scale;
    };
    std::vector<Block> active;
    for (int l = 0; l < m; ++l) {
      for (int p = 0; p <= l; ++p) {
        if (blocks[l][p] == complex{0.0, 0.0}) continue;
        active.push_back({blocks[l][p], l, p,
                          std::log(static_cast<double>(m)) + std::lgamma(static_cast<double>(m + p)) -
                              std::lgamma(static_cast<double>(l + 2))});
      }
    }
    if (active.empty()) continue;

    // mu^m / m! / f2'(0)^{2m-1}
    const complex base = static_cast<double>(m) * log_mu - std::lgamma(m + 1.0) -
                         static_cast<double>(2 * m - 1) * log_d1;

    KahanSum column;
    for (int k = 0; k <= k_last; ++k) {
      const complex phase = base + static_cast<double>(k) * log_ratio;
      complex term{0.0, 0.0};
      for (const Block& blk : active) {
        const double re = blk.log_scale + phase.real();
        if (re > kMaxExpArg) throw_overflow(m, k);
        term += blk.weight * std::exp(complex{re, phase.imag()});
      }
      if (!std::isfinite(term.real()) || !std::isfinite(term.imag())) throw_overflow(m, k);
      column.add(term);

      // Advance every block from k to k+1:
      //   ratio = (k+m+1)(k+m+p) / ((k+1)(k+l+2))
      const double kk = static_cast<double>(k);
      for (Block& blk : active) {
        blk.log_scale += std::log(((kk + m + 1.0) * (kk + m + blk.p)) / ((kk + 1.0) * (kk + blk.l + 2.0)));
      }
    }
    total.add(column.sum);
  }
  return total.sum;
}

complex v_series_direct(const BranchQuantities& b, double tau, const Truncation& t) {
  t.validate();
  HmkEvaluator ev(b.c, tau);
  complex v{0.0, 0.0};
  for (int m = 1; m <= t.m_max; ++m) {
    for (int k = 0; k <= t.k_max; ++k) {
      const double scale = static_cast<double>(rising_factorial(m, k)) /
                           (std::tgamma(m + 1.0) * std::tgamma(k + 1.0));
      v += scale * ev(m, k) * std::pow(b.mu, m) * std::pow(b.sigma, k);
    }
  }
  return v;
}

complex assemble_root(const BranchQuantities& b, const ReducedParams& r, complex v) {
  return (b.L + std::log(1.0 / b.L) + std::log(r.tau) + v) / r.tau + r.alpha1;
}

complex recover_v(const BranchQuantities& b, const ReducedParams& r, complex s_rescaled) {
  return r.tau * (s_rescaled - r.alpha1) - b.L - std::log(1.0 / b.L) - std::log(r.tau);
}

Root root_series(const ModelParams& p, int j, const Truncation& t) {
  const ReducedParams r = reduce(p);
  const BranchQuantities b = branch_quantities(r, j);
  Root root;
  root.j = j;
  root.v = v_series(b, r.tau, t);
  root.s_original = assemble_root(b, r, root.v) / p.tau1;
  root.s_rescaled = root.s_original * p.tau1;
  root.residual = std::abs(rescaled_residual(r, root.s_rescaled));
  root.diagnostics = assumption_diagnostics(r, j);
  return root;
}

}  // namespace dde
