#pragma once

#include "lfi/core.hpp"

#include <span>

namespace lfi {

/// Full-covariance Gaussian stored through the upper Cholesky factor U of its
/// precision, so that inverse(covariance) = U^T U and diag(U) > 0.
class Gaussian {
 public:
  Gaussian() = default;
  /// Takes ownership of (mean, U). Throws if U is not square upper triangular
  /// with a strictly positive diagonal.
  Gaussian(Vector mean, Matrix prec_chol);

  static Gaussian from_covariance(const Vector& mean, const Matrix& covariance);
  static Gaussian from_precision(const Vector& mean, const Matrix& precision);
  static Gaussian standard(Index dim);
  static Gaussian isotropic(const Vector& mean, Scalar variance);

  Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& prec_chol() const { return prec_chol_; }

  Matrix precision() const;
  Matrix covariance() const;
  /// log det of the covariance, -2 * sum(log diag U).
  Scalar log_det_covariance() const;

  friend bool operator==(const Gaussian& a, const Gaussian& b) {
    return a.mean_ == b.mean_ && a.prec_chol_ == b.prec_chol_;
  }

 private:
  Vector mean_;
  Matrix prec_chol_;
};

Scalar log_pdf(const Gaussian& g, const Eigen::Ref<const Vector>& theta);

Vector sample(const Gaussian& g, Rng& rng);

/// KL(p || q) in closed form.
Scalar kl_divergence(const Gaussian& p, const Gaussian& q);

/// Weighted mean and covariance of a sample set. Weights must be nonnegative;
/// they are normalized by their total. Throws DegenerateSample when the mass
/// sits on a single point or the covariance cannot be factorized.
Gaussian fit_gaussian_weighted(std::span<const Vector> samples, std::span<const Scalar> weights);
Gaussian fit_gaussian(std::span<const Vector> samples);

/// Axis-aligned uniform density on [lower, upper].
class UniformBoxPrior {
 public:
  UniformBoxPrior() = default;
  UniformBoxPrior(Vector lower, Vector upper);

  Index dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  bool contains(const Eigen::Ref<const Vector>& theta) const;
  Scalar log_volume() const;

  friend bool operator==(const UniformBoxPrior& a, const UniformBoxPrior& b) {
    return a.lower_ == b.lower_ && a.upper_ == b.upper_;
  }

 private:
  Vector lower_;
  Vector upper_;
};

/// -log(volume) inside the box, -infinity outside.
Scalar log_pdf(const UniformBoxPrior& box, const Eigen::Ref<const Vector>& theta);
Vector sample(const UniformBoxPrior& box, Rng& rng);

}  // namespace lfi
