#pragma once

#include "lfi/gaussian.hpp"

#include <optional>

namespace lfi {

/// Simulated training pairs stored column-wise: thetas is D x N, xs is x_dim x N.
struct SimDataset {
  Matrix thetas;
  Matrix xs;
  /// Every simulator call spent producing the pairs, including discarded draws.
  long n_simulations = 0;
  /// Proposal the parameters were drawn from; empty when drawn from the prior.
  std::optional<Gaussian> proposal;

  Index size() const { return thetas.cols(); }
  Index theta_dim() const { return thetas.rows(); }
  Index x_dim() const { return xs.rows(); }
};

}  // namespace lfi
