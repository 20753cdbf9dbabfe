#pragma once

// Common mean of a two-component 1-D Gaussian mixture under a uniform prior.

#include "lfi/simulator.hpp"

#include <functional>

namespace lfi {

struct MogProblem {
  Scalar theta_lower = -10.0;
  Scalar theta_upper = 10.0;
  Scalar alpha = 0.5;
  Scalar sigma1 = 1.0;
  Scalar sigma2 = 0.1;
  Scalar x_o = 0.0;
};

/// x ~ alpha N(theta, sigma1^2) + (1 - alpha) N(theta, sigma2^2).
Scalar sim_mog(const MogProblem& p, Scalar theta, Rng& rng);

Simulator mog_simulator(const MogProblem& p = {});
Prior mog_prior(const MogProblem& p = {});

/// Exact posterior density at x_o: the mixture centred on x_o restricted to
/// the prior interval and renormalized.
std::function<Scalar(Scalar)> mog_true_posterior(const MogProblem& p, Scalar x_o);

}  // namespace lfi
