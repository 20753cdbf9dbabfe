#pragma once

#include "lfi/mdn.hpp"
#include "lfi/mdn_svi.hpp"
#include "lfi/simulator.hpp"

#include <variant>

namespace lfi {

struct InferenceConfig {
  Index n_per_iteration = 300;
  Index max_iterations = 10;
  /// Symmetrized KL between successive proposals that counts as converged.
  Scalar convergence_kl_tol = 0.05;
  Index k_final = 1;
  Index n_final = 2000;
  std::uint64_t rng_seed = 0;

  /// Hidden layer sizes of freshly created networks.
  std::vector<Index> hidden{20};
  Scalar svi_lambda = kDefaultSviLambda;
  /// Training of the proposal network in each iteration of the fixed point.
  TrainConfig proposal_training{.n_epochs = 1000};
  /// Training of the posterior network.
  TrainConfig final_training{.n_epochs = 1000};
  Scalar replication_noise = 1e-3;

  void validate() const;
};

/// Corrects the conditional learned under `proposal` for the actual prior.
/// Returns q unchanged when there is no proposal or it equals a Gaussian prior.
GaussianMixture posterior_estimate(const GaussianMixture& q_at_xo, const Prior& prior,
                                   const std::optional<Gaussian>& proposal);

/// Symmetrized KL between successive proposals is below tol.
bool proposal_converged(const Gaussian& prev, const Gaussian& next, Scalar tol);

struct ProposalResult {
  Gaussian proposal;
  SviNet net;
  /// Proposal after every completed iteration.
  std::vector<Gaussian> trace;
  long n_simulations = 0;
  bool converged = false;
  /// Batches discarded because the division failed.
  int division_failures = 0;
};

/// Fits a Gaussian proposal by iterating: simulate from the current proposal,
/// continue training a one-component Bayesian MDN, and correct its output at
/// x_o for the proposal. Aborts with NonPositiveDefinite when two successive
/// batches both give an invalid division.
ProposalResult run_algorithm1(const Simulator& sim, const Prior& prior, const Vector& x_o,
                              const InferenceConfig& cfg);

using AnyNet = std::variant<MdnNet, SviNet>;

/// Mixture predicted at x (prediction mode for a Bayesian net).
GaussianMixture predict(const AnyNet& net, const Vector& x);

struct PosteriorResult {
  GaussianMixture posterior;
  AnyNet net;
  long n_simulations = 0;
};

/// Draws n_final pairs from the proposal (or the prior), trains a K_final
/// component net, and corrects its output at x_o for the proposal. A given
/// one-component net is replicated to K_final components first; without an
/// init a fresh conventional MDN is trained.
PosteriorResult run_algorithm2(const Simulator& sim, const Prior& prior, const Vector& x_o,
                               const std::optional<Gaussian>& proposal,
                               const std::optional<AnyNet>& init, const InferenceConfig& cfg);

}  // namespace lfi
