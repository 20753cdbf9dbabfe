#include "lfi/simulator.hpp"

#include "lfi/errors.hpp"

#include <stdexcept>

namespace lfi {

namespace {

// Consecutive discarded draws tolerated before giving up on a batch.
constexpr int kMaxConsecutiveFailures = 10000;

}  // namespace

Vector sample_proposal(const Prior& prior, const std::optional<Gaussian>& proposal, Rng& rng) {
  if (!proposal) return sample(prior, rng);
  if (proposal->dim() != prior.dim()) throw DimensionMismatch("sample_proposal", prior.dim(), proposal->dim());
  for (int attempt = 0; attempt < kMaxConsecutiveFailures; ++attempt) {
    Vector theta = sample(*proposal, rng);
    if (prior.contains(theta)) return theta;
  }
  throw std::runtime_error("sample_proposal: proposal puts almost no mass inside the prior support");
}

SimDataset simulate_dataset(const Simulator& sim, const Prior& prior,
                            const std::optional<Gaussian>& proposal, Index n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("simulate_dataset: need at least one pair");
  if (prior.dim() != sim.theta_dim) throw DimensionMismatch("simulate_dataset", sim.theta_dim, prior.dim());
  SimDataset data;
  data.thetas.resize(sim.theta_dim, n);
  data.xs.resize(sim.x_dim, n);
  data.proposal = proposal;
  const std::uint64_t base = rng();
  for (Index i = 0; i < n; ++i) {
    Rng draw_rng(derive_seed(base, static_cast<std::uint64_t>(i)));
    for (int failures = 0;; ++failures) {
      if (failures == kMaxConsecutiveFailures)
        throw std::runtime_error("simulate_dataset: " + sim.name + " keeps exploding");
      Vector theta = sample_proposal(prior, proposal, draw_rng);
      ++data.n_simulations;
      try {
        Vector x = sim.simulate(theta, draw_rng);
        if (x.size() != sim.x_dim) throw DimensionMismatch("simulate_dataset", sim.x_dim, x.size());
        data.thetas.col(i) = theta;
        data.xs.col(i) = x;
        break;
      } catch (const SimulationExploded&) {
      }
    }
  }
  return data;
}

}  // namespace lfi
