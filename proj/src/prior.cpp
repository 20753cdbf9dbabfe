#include "lfi/prior.hpp"

namespace lfi {

Index Prior::dim() const {
  return std::visit([](const auto& d) { return d.dim(); }, dist_);
}

bool Prior::contains(const Eigen::Ref<const Vector>& theta) const {
  if (const auto* b = box()) return b->contains(theta);
  return true;
}

Scalar log_pdf(const Prior& prior, const Eigen::Ref<const Vector>& theta) {
  if (const auto* b = prior.box()) return log_pdf(*b, theta);
  return log_pdf(*prior.gaussian(), theta);
}

Vector sample(const Prior& prior, Rng& rng) {
  if (const auto* b = prior.box()) return sample(*b, rng);
  return sample(*prior.gaussian(), rng);
}

Vector prior_mean(const Prior& prior) {
  if (const auto* b = prior.box()) return 0.5 * (b->lower() + b->upper());
  return prior.gaussian()->mean();
}

Matrix prior_covariance(const Prior& prior) {
  if (const auto* b = prior.box()) {
    const Vector width = b->upper() - b->lower();
    return (width.array().square() / 12.0).matrix().asDiagonal();
  }
  return prior.gaussian()->covariance();
}

}  // namespace lfi
