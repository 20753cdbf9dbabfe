#pragma once

#include "lfi/dataset.hpp"
#include "lfi/prior.hpp"

#include <functional>
#include <string>

namespace lfi {

/// A stochastic generative model x ~ p(x | theta). `simulate` may throw
/// SimulationExploded for a draw that should be discarded.
struct Simulator {
  std::string name;
  Index theta_dim = 0;
  Index x_dim = 0;
  std::function<Vector(const Vector& theta, Rng& rng)> simulate;
};

/// Draws theta from `proposal` restricted to the prior support, or from the
/// prior when no proposal is given.
Vector sample_proposal(const Prior& prior, const std::optional<Gaussian>& proposal, Rng& rng);

/// Draws n pairs theta_n ~ proposal (or prior), x_n ~ simulator(theta_n).
/// Exploded draws are replaced with a fresh theta and still counted. Each pair
/// uses its own substream of a seed taken from `rng`.
SimDataset simulate_dataset(const Simulator& sim, const Prior& prior,
                            const std::optional<Gaussian>& proposal, Index n, Rng& rng);

}  // namespace lfi
