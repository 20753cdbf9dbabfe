#pragma once

#include "lfi/gaussian.hpp"

#include <variant>

namespace lfi {

/// Prior over parameters: a uniform box or a Gaussian.
class Prior {
 public:
  Prior(UniformBoxPrior box) : dist_(std::move(box)) {}
  Prior(Gaussian g) : dist_(std::move(g)) {}

  Index dim() const;
  bool is_uniform() const { return std::holds_alternative<UniformBoxPrior>(dist_); }
  /// Null unless the prior has that form.
  const UniformBoxPrior* box() const { return std::get_if<UniformBoxPrior>(&dist_); }
  const Gaussian* gaussian() const { return std::get_if<Gaussian>(&dist_); }

  /// True everywhere for a Gaussian prior.
  bool contains(const Eigen::Ref<const Vector>& theta) const;

 private:
  std::variant<UniformBoxPrior, Gaussian> dist_;
};

Scalar log_pdf(const Prior& prior, const Eigen::Ref<const Vector>& theta);
Vector sample(const Prior& prior, Rng& rng);

/// Mean and covariance of the prior (the box moments for a uniform prior).
Vector prior_mean(const Prior& prior);
Matrix prior_covariance(const Prior& prior);

}  // namespace lfi
