#pragma once

#include "lfi/simulator.hpp"

namespace lfi {

inline constexpr long kDefaultSimulationBudget = 10'000'000;

struct AbcResult {
  /// Accepted parameters, one per column.
  Matrix samples;
  /// On the simplex; uniform for rejection and MCMC.
  Vector weights;
  long n_simulations = 0;
  Scalar epsilon = 0.0;
  Scalar ess = 0.0;
  /// MCMC that never moved, or SMC stopped early by the budget.
  bool degenerate = false;
  /// SMC: tolerance and simulator calls of every completed round.
  std::vector<Scalar> round_epsilons;
  std::vector<long> round_simulations;
};

/// Distance used by every ABC method: Euclidean norm of x - x_o.
Scalar abc_distance(const Vector& x, const Vector& x_o);

/// Accepts theta ~ prior whenever |x - x_o| < epsilon until n_accept samples
/// are collected. Throws BudgetExhausted after max_simulations calls.
AbcResult rejection_abc(const Simulator& sim, const Prior& prior, const Vector& x_o, Scalar epsilon,
                        Index n_accept, Rng& rng, long max_simulations = kDefaultSimulationBudget);

/// Spends exactly n_simulations prior draws and keeps those within epsilon,
/// for comparisons at a fixed simulation budget. May return no samples.
AbcResult rejection_abc_budget(const Simulator& sim, const Prior& prior, const Vector& x_o, Scalar epsilon,
                               long n_simulations, Rng& rng);

struct McmcConfig {
  Scalar proposal_std = 0.1;
  Index n_steps = 10000;
  Vector init;
  void validate() const;
};

/// Likelihood-free Metropolis-Hastings with a spherical Gaussian random walk.
/// Returns all n_steps states; `degenerate` is set when nothing was accepted.
AbcResult mcmc_abc(const Simulator& sim, const Prior& prior, const Vector& x_o, Scalar epsilon,
                   const McmcConfig& cfg, Rng& rng);

struct SmcConfig {
  Index n_particles = 1000;
  Scalar eps_initial = 1.0;
  Scalar eps_decay = 0.9;
  Index n_rounds = 10;
  long max_simulations = kDefaultSimulationBudget;
  void validate() const;
};

/// Population Monte Carlo ABC with tolerances eps_initial * eps_decay^r.
/// Particles are perturbed with a Gaussian kernel of twice the weighted
/// per-dimension variance. When the budget runs out the last completed round
/// is returned with `degenerate` set.
AbcResult smc_abc(const Simulator& sim, const Prior& prior, const Vector& x_o, const SmcConfig& cfg, Rng& rng);

/// Minimum over dimensions of N / (1 + 2 sum_l r_l), summing autocorrelations
/// up to the first non-positive one. Chain states are columns.
Scalar ess_mcmc(const Matrix& chain);

/// 1 / sum(w^2).
Scalar ess_weighted(const Vector& weights);

}  // namespace lfi
