#pragma once

#include "lfi/gaussian.hpp"

#include <span>
#include <vector>

namespace lfi {

/// Weighted sum of Gaussians sharing one dimension. Weights are strictly
/// positive and sum to one (they are renormalized on construction).
class GaussianMixture {
 public:
  GaussianMixture() = default;
  GaussianMixture(Vector weights, std::vector<Gaussian> components);
  explicit GaussianMixture(Gaussian single);

  Index dim() const { return components_.front().dim(); }
  Index size() const { return static_cast<Index>(components_.size()); }
  const Vector& weights() const { return weights_; }
  const std::vector<Gaussian>& components() const { return components_; }
  const Gaussian& component(Index k) const { return components_[static_cast<std::size_t>(k)]; }

  Vector mean() const;
  Matrix covariance() const;

 private:
  Vector weights_;
  std::vector<Gaussian> components_;
};

/// log sum_k w_k N(theta; m_k, S_k), evaluated with log-sum-exp.
Scalar log_pdf(const GaussianMixture& m, const Eigen::Ref<const Vector>& theta);

/// Density of the 1-D marginal along coordinate `index`.
Scalar marginal_pdf(const GaussianMixture& m, Index index, Scalar value);

Vector sample(const GaussianMixture& m, Rng& rng);
std::vector<Vector> sample(const GaussianMixture& m, Rng& rng, std::size_t n);

/// Normalized mixture proportional to q(theta) / p0(theta). Throws
/// NonPositiveDefinite when some component is not strictly narrower than p0.
GaussianMixture divide_mixture_by_gaussian(const GaussianMixture& q, const Gaussian& p0);

/// Normalized mixture proportional to q(theta) * numerator(theta) / denominator(theta).
GaussianMixture multiply_and_divide(const GaussianMixture& q, const Gaussian& numerator,
                                    const Gaussian& denominator);

struct EmOptions {
  int n_restarts = 5;
  int max_iterations = 500;
  Scalar tolerance = 1e-6;
  int max_reinitializations = 10;
};

struct EmResult {
  GaussianMixture mixture;
  Scalar log_likelihood = 0.0;
  /// Total log-likelihood at the start of each iteration of the winning restart.
  std::vector<Scalar> trace;
};

/// Maximum-likelihood mixture of `n_components` Gaussians by EM, best of
/// several restarts, each seeded by a random nearest-anchor partition.
EmResult fit_mixture_em(std::span<const Vector> samples, Index n_components, Rng& rng,
                        const EmOptions& options = {});

}  // namespace lfi
