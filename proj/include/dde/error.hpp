#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dde {

/// Failure categories surfaced by the library. Numerical outcomes that are
/// expected in normal use (Newton divergence, a failed scan point) are
/// reported through status fields instead.
enum class Errc {
  invalid_argument,
  coincident_lags,
  single_lag_degenerate,  // gamma == 0: the problem has one lag
  singular_branch,        // ln_j(gamma2) == 0
  sequence_too_short,
  non_finite,
  rank_deficient,
  contour_failure,
  step_too_large,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::coincident_lags: return "coincident_lags";
    case Errc::single_lag_degenerate: return "single_lag_degenerate";
    case Errc::singular_branch: return "singular_branch";
    case Errc::sequence_too_short: return "sequence_too_short";
    case Errc::non_finite: return "non_finite";
    case Errc::rank_deficient: return "rank_deficient";
    case Errc::contour_failure: return "contour_failure";
    case Errc::step_too_large: return "step_too_large";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dde
