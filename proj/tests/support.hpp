#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "dde/model.hpp"

namespace testing {

using dde::complex;

inline double rel_err(complex a, complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240517);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

// Used-pars-2: alpha1 = -1, beta2 = 0.001, gamma2 = 6, tau = 4 with tau1 = 1.
inline dde::ModelParams used_pars_2() { return dde::from_reduced(-1.0, 0.001, 6.0, 4.0); }

inline constexpr double kUsedPars2Root = -0.41695006495896390365;

// Slope of ln|x| at the local maxima of |x| inside [t0, t1], least squares.
inline double envelope_rate(const std::vector<double>& t, const std::vector<double>& x, double t0, double t1) {
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    const double a = std::abs(x[i]);
    if (a <= std::abs(x[i - 1]) || a < std::abs(x[i + 1]) || a == 0.0) continue;
    const double y = std::log(a);
    n += 1;
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace testing
