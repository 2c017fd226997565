#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "dde/model.hpp"
#include "dde/series.hpp"

namespace dde {

/// s - alpha - beta e^{-s tau1} - gamma e^{-s tau2}, original time.
complex char_residual(const ModelParams& p, complex s);

/// d/ds of char_residual.
complex char_derivative(const ModelParams& p, complex s);

enum class NewtonStatus { converged, diverged, near_defective };

constexpr std::string_view to_string(NewtonStatus s) noexcept {
  switch (s) {
    case NewtonStatus::converged: return "converged";
    case NewtonStatus::diverged: return "diverged";
    case NewtonStatus::near_defective: return "near_defective";
  }
  return "unknown";
}

struct NewtonOptions {
  int max_iter = 50;
  double tol = 1e-12;
  int max_halvings = 30;
};

struct NewtonResult {
  NewtonStatus status = NewtonStatus::diverged;
  complex s;  // original time
  double residual = 0.0;  // |char_residual(p, s)|
  int iterations = 0;
};

/// Damped Newton on char_residual: each step is halved (at most
/// max_halvings times) until |g| decreases. Never throws for numerical
/// trouble; the status says what happened.
NewtonResult newton_refine(const ModelParams& p, complex s0, const NewtonOptions& opts = {});

/// Refines a series root in place of its branch: j is kept, v is recovered
/// from the refined value, and residual is recomputed in rescaled time.
struct RefinedRoot {
  Root root;
  NewtonResult newton;
};
RefinedRoot refine_root(const ModelParams& p, const Root& seed, const NewtonOptions& opts = {});

struct ContourResult {
  complex v;
  double radius = 0.0;     // radius actually used
  int shrinks = 0;         // how often the radius was reduced by 10%
  double min_modulus = 0.0;  // min |f| over the nodes
  double enclosed = 0.0;   // (1/2 pi i) \oint f'/f, the number of enclosed roots
  double halving_delta = 0.0;  // |v(n) - v(n/2)| from the even-node subrule
  bool outside_radius = false;  // |v| > radius: the root may not be the enclosed one
};

/// Trapezoidal evaluation of (1/2 pi i) \oint zeta f'(zeta)/f(zeta) dzeta on
/// |zeta| = pi min{1, tau}, where f(v) = e^{-v} + c e^{-v/tau} - sigma v - 1 - c - mu.
/// The radius shrinks by 10% (up to 3 times) when a node sits on a root of f;
/// Errc::contour_failure after that.
ContourResult v_contour(const BranchQuantities& b, double tau, int n_nodes = 2048);

struct GridSpec {
  double re_min = -1.0;
  double re_max = 1.0;
  double im_min = -1.0;
  double im_max = 1.0;
  int n_re = 2;
  int n_im = 2;

  void validate() const;
  [[nodiscard]] double re_at(int col) const;
  [[nodiscard]] double im_at(int row) const;
};

/// log10 |1 / char_residual| on a GridSpec, clamped to [-16, 16]. Row-major,
/// rows follow the imaginary axis upward, columns the real axis rightward.
struct TransferGrid {
  GridSpec spec;
  std::vector<double> values;

  [[nodiscard]] double at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * spec.n_re + col];
  }
};

inline constexpr double kTransferClamp = 16.0;

TransferGrid transfer_grid(const ModelParams& p, const GridSpec& g);

struct GridCell {
  int row = 0;
  int col = 0;
};

/// Nodes whose value is >= all of their (up to 8) neighbours.
std::vector<GridCell> local_maxima(const TransferGrid& grid);

/// Converged Newton limits from `seeds`, deduplicated to 1e-8 and sorted by
/// decreasing real part.
std::vector<complex> refine_seeds(const ModelParams& p, std::span<const complex> seeds,
                                  const NewtonOptions& opts = {});

/// Seeds for the rightmost roots: the Lambert W roots (|j| <= branches) of
/// the four single-lag problems obtained by dropping one delayed term or
/// collapsing its lag to zero.
std::vector<complex> single_lag_seeds(const ModelParams& p, int branches);

}  // namespace dde
