#pragma once

// Bayesian linear regression with fixed inputs and a Gaussian prior.

#include "lfi/simulator.hpp"

namespace lfi {

struct BlrProblem {
  /// One input vector u_i per row (10 x 6 by default).
  Matrix inputs;
  Scalar sigma = 0.1;
  Gaussian prior;
  Vector theta_true;
  Vector x_o;
};

/// Inputs iid standard normal; theta_true drawn from the N(0, I) prior and x_o
/// simulated from it, all from `seed`.
BlrProblem make_blr_problem(std::uint64_t seed, Index theta_dim = 6, Index n_inputs = 10, Scalar sigma = 0.1);

/// x_i = theta^T u_i + sigma z_i.
Vector sim_blr(const BlrProblem& p, const Vector& theta, Rng& rng);

Simulator blr_simulator(const BlrProblem& p);

/// Conjugate posterior: precision S^-1 + U^T U / sigma^2.
Gaussian blr_true_posterior(const BlrProblem& p, const Vector& x_o);

}  // namespace lfi
