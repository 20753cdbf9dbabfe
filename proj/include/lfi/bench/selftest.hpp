#pragma once

// Oracle suites behind `lfi selftest`. Each returns the worst observed error
// against its tolerance.

#include "lfi/core.hpp"

#include <string>
#include <vector>

namespace lfi {

struct CheckResult {
  std::string name;
  bool passed = false;
  Scalar worst = 0.0;
  Scalar tolerance = 0.0;
  std::string detail;
};

inline constexpr Scalar kGradientStep = 1e-5;
inline constexpr Scalar kGradientTolerance = 1e-4;
inline constexpr Scalar kDivisionTolerance = 1e-6;

/// Analytic gradients of the MDN log likelihood and of the fixed-noise
/// Bayesian MDN bound against central differences on 10 random small
/// architectures. The error of each gradient is |g - g_fd| / max(|g|, |g_fd|)
/// in the Euclidean norm.
CheckResult check_gradients(std::uint64_t seed = 1, int n_architectures = 10);

/// Mixture division against pointwise ratio and trapezoid normalization on a
/// grid, for random valid 1-D and 2-D cases (half each). Max density error.
CheckResult check_division(std::uint64_t seed = 1, int n_cases = 20);

/// Weighted ESS at its uniform and one-hot limits and the chain ESS of an
/// iid sequence of 10^4 draws (within 15%).
CheckResult check_ess(std::uint64_t seed = 1);

std::vector<CheckResult> run_selftest(std::uint64_t seed = 1);

}  // namespace lfi
