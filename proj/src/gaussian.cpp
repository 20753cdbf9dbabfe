#include "lfi/gaussian.hpp"

#include "lfi/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lfi {

namespace {

void check_dim(const char* where, Index expected, Index got) {
  if (expected != got) throw DimensionMismatch(where, expected, got);
}

// Upper factor U with U^T U = m, or nullopt-like failure flag.
bool upper_cholesky(const Matrix& m, Matrix& out) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return false;
  out = llt.matrixU();
  return (out.diagonal().array() > 0.0).all() && out.allFinite();
}

}  // namespace

Gaussian::Gaussian(Vector mean, Matrix prec_chol)
    : mean_(std::move(mean)), prec_chol_(std::move(prec_chol)) {
  if (prec_chol_.rows() != prec_chol_.cols() || prec_chol_.rows() != mean_.size())
    throw DimensionMismatch("Gaussian", mean_.size(), prec_chol_.rows());
  for (Index j = 0; j < prec_chol_.cols(); ++j) {
    if (!(prec_chol_(j, j) > 0.0))
      throw std::invalid_argument("Gaussian: precision factor needs a positive diagonal");
    for (Index i = j + 1; i < prec_chol_.rows(); ++i)
      if (prec_chol_(i, j) != 0.0)
        throw std::invalid_argument("Gaussian: precision factor must be upper triangular");
  }
}

Gaussian Gaussian::from_precision(const Vector& mean, const Matrix& precision) {
  check_dim("Gaussian::from_precision", mean.size(), precision.rows());
  Matrix u;
  if (!upper_cholesky(precision, u))
    throw std::invalid_argument("Gaussian::from_precision: matrix is not positive definite");
  return Gaussian(mean, u);
}

Gaussian Gaussian::from_covariance(const Vector& mean, const Matrix& covariance) {
  check_dim("Gaussian::from_covariance", mean.size(), covariance.rows());
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("Gaussian::from_covariance: matrix is not positive definite");
  const Matrix precision = llt.solve(Matrix::Identity(mean.size(), mean.size()));
  return from_precision(mean, 0.5 * (precision + precision.transpose()));
}

Gaussian Gaussian::standard(Index dim) {
  return Gaussian(Vector::Zero(dim), Matrix::Identity(dim, dim));
}

Gaussian Gaussian::isotropic(const Vector& mean, Scalar variance) {
  const Index d = mean.size();
  return Gaussian(mean, Matrix::Identity(d, d) / std::sqrt(variance));
}

Matrix Gaussian::precision() const { return prec_chol_.transpose() * prec_chol_; }

Matrix Gaussian::covariance() const {
  const Index d = dim();
  const Matrix u_inv =
      prec_chol_.triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
  return u_inv * u_inv.transpose();
}

Scalar Gaussian::log_det_covariance() const {
  return -2.0 * prec_chol_.diagonal().array().log().sum();
}

Scalar log_pdf(const Gaussian& g, const Eigen::Ref<const Vector>& theta) {
  check_dim("log_pdf(Gaussian)", g.dim(), theta.size());
  const Vector z = g.prec_chol().triangularView<Eigen::Upper>() * (theta - g.mean());
  return -0.5 * static_cast<Scalar>(g.dim()) * kLog2Pi +
         g.prec_chol().diagonal().array().log().sum() - 0.5 * z.squaredNorm();
}

Vector sample(const Gaussian& g, Rng& rng) {
  const Vector z = standard_normal(g.dim(), rng);
  return g.mean() + g.prec_chol().triangularView<Eigen::Upper>().solve(z);
}

Scalar kl_divergence(const Gaussian& p, const Gaussian& q) {
  check_dim("kl_divergence", p.dim(), q.dim());
  const Index d = p.dim();
  // tr(P_q S_p) = || U_q U_p^{-1} ||_F^2
  const Matrix up_inv =
      p.prec_chol().triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
  const Scalar trace = (q.prec_chol() * up_inv).squaredNorm();
  const Scalar maha = (q.prec_chol() * (q.mean() - p.mean())).squaredNorm();
  const Scalar kl = 0.5 * (trace + maha - static_cast<Scalar>(d) + q.log_det_covariance() -
                           p.log_det_covariance());
  return std::max(kl, 0.0);
}

Gaussian fit_gaussian_weighted(std::span<const Vector> samples, std::span<const Scalar> weights) {
  if (samples.size() != weights.size())
    throw DimensionMismatch("fit_gaussian_weighted", static_cast<long>(samples.size()),
                            static_cast<long>(weights.size()));
  if (samples.size() < 2) throw DegenerateSample("fit_gaussian_weighted: need at least 2 samples");
  const Index d = samples.front().size();

  Scalar total = 0.0;
  std::size_t n_support = 0;
  for (Scalar w : weights) {
    if (w < 0.0 || !std::isfinite(w))
      throw std::invalid_argument("fit_gaussian_weighted: weights must be finite and nonnegative");
    total += w;
    if (w > 0.0) ++n_support;
  }
  if (n_support < 2 || !(total > 0.0))
    throw DegenerateSample("fit_gaussian_weighted: all weight on a single point");

  // Equal weights take the plain (unweighted) moment path.
  const bool uniform = std::all_of(weights.begin(), weights.end(),
                                   [&](Scalar w) { return w == weights.front(); });
  const Scalar count = static_cast<Scalar>(samples.size());

  Vector mean = Vector::Zero(d);
  for (std::size_t n = 0; n < samples.size(); ++n) {
    check_dim("fit_gaussian_weighted", d, samples[n].size());
    if (uniform)
      mean += samples[n];
    else
      mean += weights[n] * samples[n];
  }
  mean /= uniform ? count : total;

  Matrix cov = Matrix::Zero(d, d);
  for (std::size_t n = 0; n < samples.size(); ++n) {
    if (weights[n] == 0.0) continue;
    const Vector delta = samples[n] - mean;
    if (uniform)
      cov.noalias() += delta * delta.transpose();
    else
      cov.noalias() += weights[n] * delta * delta.transpose();
  }
  cov /= uniform ? count : total;
  cov.diagonal() = cov.diagonal().cwiseMax(1e-12);

  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success)
    throw DegenerateSample("fit_gaussian_weighted: covariance is not factorizable");
  const Matrix precision = llt.solve(Matrix::Identity(d, d));
  Matrix u;
  if (!upper_cholesky(0.5 * (precision + precision.transpose()), u))
    throw DegenerateSample("fit_gaussian_weighted: covariance is not factorizable");
  return Gaussian(std::move(mean), std::move(u));
}

Gaussian fit_gaussian(std::span<const Vector> samples) {
  const std::vector<Scalar> w(samples.size(), 1.0 / static_cast<Scalar>(samples.size()));
  return fit_gaussian_weighted(samples, w);
}

UniformBoxPrior::UniformBoxPrior(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size())
    throw DimensionMismatch("UniformBoxPrior", lower_.size(), upper_.size());
  if (!(lower_.array() < upper_.array()).all())
    throw std::invalid_argument("UniformBoxPrior: need lower < upper elementwise");
}

bool UniformBoxPrior::contains(const Eigen::Ref<const Vector>& theta) const {
  return (theta.array() >= lower_.array()).all() && (theta.array() <= upper_.array()).all();
}

Scalar UniformBoxPrior::log_volume() const { return (upper_ - lower_).array().log().sum(); }

Scalar log_pdf(const UniformBoxPrior& box, const Eigen::Ref<const Vector>& theta) {
  check_dim("log_pdf(UniformBoxPrior)", box.dim(), theta.size());
  return box.contains(theta) ? -box.log_volume() : -std::numeric_limits<Scalar>::infinity();
}

Vector sample(const UniformBoxPrior& box, Rng& rng) {
  Vector out(box.dim());
  for (Index i = 0; i < box.dim(); ++i)
    out[i] = std::uniform_real_distribution<Scalar>(box.lower()[i], box.upper()[i])(rng);
  return out;
}

}  // namespace lfi
