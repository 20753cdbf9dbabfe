#pragma once

#include "lfi/mixture.hpp"
#include "lfi/prior.hpp"

#include <functional>

namespace lfi {

/// Single Gaussian with the mixture's mean and covariance.
Gaussian moment_match(const GaussianMixture& m);

/// KL(true || learned); a mixture is first collapsed by moment matching.
Scalar metric_kl_to_true(const Gaussian& true_post, const GaussianMixture& learned);

/// -log q(theta_true).
Scalar metric_neg_logprob_true(const GaussianMixture& posterior, const Vector& theta_true);

inline constexpr Index kTvGridPoints = 2001;

/// Total variation 0.5 * integral |p - q| over [lower, upper] by the trapezoid
/// rule on an evenly spaced grid (1-D posteriors).
Scalar total_variation_1d(const std::function<Scalar(Scalar)>& p, const GaussianMixture& q, Scalar lower,
                          Scalar upper, Index n_points = kTvGridPoints);

/// Monte Carlo estimate of the mixture mass outside a box prior.
Scalar mass_outside(const GaussianMixture& m, const UniformBoxPrior& box, Rng& rng, Index n_samples = 10000);

}  // namespace lfi
