#include "lfi/bench/metrics.hpp"

#include "lfi/errors.hpp"

#include <cmath>

namespace lfi {

Gaussian moment_match(const GaussianMixture& m) {
  if (m.size() == 1) return m.component(0);
  return Gaussian::from_covariance(m.mean(), m.covariance());
}

Scalar metric_kl_to_true(const Gaussian& true_post, const GaussianMixture& learned) {
  return kl_divergence(true_post, moment_match(learned));
}

Scalar metric_neg_logprob_true(const GaussianMixture& posterior, const Vector& theta_true) {
  if (posterior.dim() != theta_true.size())
    throw DimensionMismatch("metric_neg_logprob_true", posterior.dim(), theta_true.size());
  return -log_pdf(posterior, theta_true);
}

Scalar total_variation_1d(const std::function<Scalar(Scalar)>& p, const GaussianMixture& q, Scalar lower,
                          Scalar upper, Index n_points) {
  if (q.dim() != 1) throw DimensionMismatch("total_variation_1d", 1, q.dim());
  if (n_points < 2 || !(upper > lower)) throw std::invalid_argument("total_variation_1d: bad grid");
  const Scalar h = (upper - lower) / static_cast<Scalar>(n_points - 1);
  Scalar sum = 0.0;
  for (Index i = 0; i < n_points; ++i) {
    const Scalar t = lower + h * static_cast<Scalar>(i);
    const Scalar diff = std::abs(p(t) - std::exp(log_pdf(q, Vector::Constant(1, t))));
    sum += (i == 0 || i == n_points - 1) ? 0.5 * diff : diff;
  }
  return 0.5 * h * sum;
}

Scalar mass_outside(const GaussianMixture& m, const UniformBoxPrior& box, Rng& rng, Index n_samples) {
  if (m.dim() != box.dim()) throw DimensionMismatch("mass_outside", box.dim(), m.dim());
  Index outside = 0;
  for (Index i = 0; i < n_samples; ++i)
    if (!box.contains(sample(m, rng))) ++outside;
  return static_cast<Scalar>(outside) / static_cast<Scalar>(n_samples);
}

}  // namespace lfi
