#include "dde/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dde/error.hpp"
#include "dde/lambert.hpp"

namespace dde {

namespace {

bool finite(complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

complex char_residual(const ModelParams& p, complex s) {
  return s - p.alpha - p.beta * std::exp(-s * p.tau1) - p.gamma * std::exp(-s * p.tau2);
}

complex char_derivative(const ModelParams& p, complex s) {
  return 1.0 + p.beta * p.tau1 * std::exp(-s * p.tau1) + p.gamma * p.tau2 * std::exp(-s * p.tau2);
}

NewtonResult newton_refine(const ModelParams& p, complex s0, const NewtonOptions& opts) {
  NewtonResult out;
  out.s = s0;
  if (!finite(s0)) return out;
  complex g = char_residual(p, s0);
  out.residual = std::abs(g);
  if (!std::isfinite(out.residual)) return out;

  for (int it = 0; it < opts.max_iter; ++it) {
    if (out.residual <= opts.tol) {
      out.status = NewtonStatus::converged;
      out.iterations = it;
      return out;
    }
    const complex dg = char_derivative(p, out.s);
    if (std::abs(dg) < 1e-30) {
      out.status = NewtonStatus::near_defective;
      out.iterations = it;
      return out;
    }
    const complex step = g / dg;
    double damping = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h, damping *= 0.5) {
      const complex trial = out.s - damping * step;
      const complex g_trial = char_residual(p, trial);
      const double r_trial = std::abs(g_trial);
      if (std::isfinite(r_trial) && r_trial < out.residual) {
        out.s = trial;
        g = g_trial;
        out.residual = r_trial;
        accepted = true;
        break;
      }
    }
    out.iterations = it + 1;
    if (!accepted) return out;  // stalled: diverged
  }
  if (out.residual <= opts.tol) out.status = NewtonStatus::converged;
  return out;
}

RefinedRoot refine_root(const ModelParams& p, const Root& seed, const NewtonOptions& opts) {
  RefinedRoot out;
  out.newton = newton_refine(p, seed.s_original, opts);
  out.root = seed;
  out.root.s_original = out.newton.s;
  out.root.s_rescaled = out.newton.s * p.tau1;
  const ReducedParams r = reduce(p);
  out.root.v = recover_v(branch_quantities(r, seed.j), r, out.root.s_rescaled);
  out.root.residual = std::abs(rescaled_residual(r, out.root.s_rescaled));
  return out;
}

ContourResult v_contour(const BranchQuantities& b, double tau, int n_nodes) {
  if (n_nodes < 4 || n_nodes % 2 != 0) {
    throw Error(Errc::invalid_argument, "v_contour needs an even node count >= 4");
  }
  if (!(tau > 0.0)) throw Error(Errc::invalid_argument, "tau must be positive");

  const auto f = [&](complex z) {
    return std::exp(-z) + b.c * std::exp(-z / tau) - b.sigma * z - 1.0 - b.c - b.mu;
  };
  const auto fprime = [&](complex z) {
    return -std::exp(-z) - (b.c / tau) * std::exp(-z / tau) - b.sigma;
  };

  ContourResult out;
  double radius = std::numbers::pi * std::min(1.0, tau);
  std::vector<complex> nodes(static_cast<std::size_t>(n_nodes));
  std::vector<complex> ratio(static_cast<std::size_t>(n_nodes));
  for (int attempt = 0; attempt <= 3; ++attempt) {
    double min_mod = std::numeric_limits<double>::infinity();
    double max_mod = 0.0;
    for (int k = 0; k < n_nodes; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / n_nodes;
      const complex z = std::polar(radius, theta);
      const complex fz = f(z);
      nodes[k] = z;
      ratio[k] = fprime(z) / fz;
      min_mod = std::min(min_mod, std::abs(fz));
      max_mod = std::max(max_mod, std::abs(fz));
    }
    if (!(min_mod > 1e-6 * max_mod) || !std::isfinite(max_mod)) {
      radius *= 0.9;
      ++out.shrinks;
      continue;
    }
    complex first{0.0, 0.0};
    complex half_first{0.0, 0.0};
    complex zeroth{0.0, 0.0};
    for (int k = 0; k < n_nodes; ++k) {
      const complex term = nodes[k] * nodes[k] * ratio[k];
      first += term;
      if (k % 2 == 0) half_first += term;
      zeroth += nodes[k] * ratio[k];
    }
    out.v = first / static_cast<double>(n_nodes);
    out.radius = radius;
    out.min_modulus = min_mod;
    out.enclosed = (zeroth / static_cast<double>(n_nodes)).real();
    out.halving_delta = std::abs(out.v - half_first / static_cast<double>(n_nodes / 2));
    out.outside_radius = std::abs(out.v) > radius;
    return out;
  }
  throw Error(Errc::contour_failure, "f has a root on the contour after 3 radius reductions");
}

void GridSpec::validate() const {
  if (!(re_min < re_max) || !(im_min < im_max)) {
    throw Error(Errc::invalid_argument, "grid bounds must satisfy min < max");
  }
  if (n_re < 2 || n_im < 2) throw Error(Errc::invalid_argument, "grid needs >= 2 nodes per axis");
}

double GridSpec::re_at(int col) const { return re_min + (re_max - re_min) * col / (n_re - 1); }

double GridSpec::im_at(int row) const { return im_min + (im_max - im_min) * row / (n_im - 1); }

TransferGrid transfer_grid(const ModelParams& p, const GridSpec& g) {
  g.validate();
  TransferGrid out;
  out.spec = g;
  out.values.resize(static_cast<std::size_t>(g.n_re) * g.n_im);
  for (int row = 0; row < g.n_im; ++row) {
    const double im = g.im_at(row);
    for (int col = 0; col < g.n_re; ++col) {
      const double mag = std::abs(char_residual(p, {g.re_at(col), im}));
      double value = mag == 0.0 ? kTransferClamp : -std::log10(mag);
      if (!std::isfinite(value)) value = value > 0 ? kTransferClamp : -kTransferClamp;
      out.values[static_cast<std::size_t>(row) * g.n_re + col] =
          std::clamp(value, -kTransferClamp, kTransferClamp);
    }
  }
  return out;
}

std::vector<GridCell> local_maxima(const TransferGrid& grid) {
  std::vector<GridCell> out;
  const int rows = grid.spec.n_im;
  const int cols = grid.spec.n_re;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double v = grid.at(r, c);
      bool is_max = true;
      for (int dr = -1; dr <= 1 && is_max; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          if (grid.at(rr, cc) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) out.push_back({r, c});
    }
  }
  return out;
}

std::vector<complex> refine_seeds(const ModelParams& p, std::span<const complex> seeds,
                                  const NewtonOptions& opts) {
  std::vector<complex> found;
  for (const complex& s0 : seeds) {
    const NewtonResult r = newton_refine(p, s0, opts);
    if (r.status != NewtonStatus::converged) continue;
    const bool dup = std::any_of(found.begin(), found.end(), [&](const complex& z) {
      return std::abs(z - r.s) <= 1e-8 * std::max(1.0, std::abs(z));
    });
    if (!dup) found.push_back(r.s);
  }
  std::sort(found.begin(), found.end(), [](const complex& a, const complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return found;
}

std::vector<complex> single_lag_seeds(const ModelParams& p, int branches) {
  struct SingleLag {
    double alpha;
    double beta;
    double tau;
  };
  const SingleLag problems[] = {
      {p.alpha + p.gamma, p.beta, p.tau1},
      {p.alpha + p.beta, p.gamma, p.tau2},
      {p.alpha, p.beta, p.tau1},
      {p.alpha, p.gamma, p.tau2},
  };
  std::vector<complex> seeds;
  for (const SingleLag& q : problems) {
    if (q.beta == 0.0) continue;
    for (int j = -branches; j <= branches; ++j) {
      const complex s = single_lag_root(q.alpha, q.beta, q.tau, j);
      if (finite(s)) seeds.push_back(s);
    }
  }
  return seeds;
}

}  // namespace dde
