#include "lfi/mixture.hpp"

#include "lfi/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lfi {

namespace {

Scalar log_sum_exp(const Vector& v) {
  const Scalar top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

struct SignedFactor {
  const Gaussian* g;
  Scalar sign;
};

// Multiplies every component of q by the signed Gaussian factors
// (sign +1 multiplies, -1 divides) and renormalizes the weights.
GaussianMixture combine(const GaussianMixture& q, std::span<const SignedFactor> factors) {
  const Index d = q.dim();
  Matrix base_precision = Matrix::Zero(d, d);
  Vector base_shift = Vector::Zero(d);
  for (const auto& f : factors) {
    if (f.g->dim() != d) throw DimensionMismatch("mixture division", d, f.g->dim());
    const Matrix p = f.g->precision();
    base_precision += f.sign * p;
    base_shift += f.sign * (p * f.g->mean());
  }

  std::vector<Gaussian> components;
  Vector log_weights(q.size());
  for (Index k = 0; k < q.size(); ++k) {
    const Gaussian& c = q.component(k);
    const Matrix pk = c.precision();
    Matrix precision = pk + base_precision;
    precision = 0.5 * (precision + precision.transpose());
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) throw NonPositiveDefinite(static_cast<std::size_t>(k));
    Matrix u = llt.matrixU();
    if (!((u.diagonal().array() > 0.0).all() && u.allFinite()))
      throw NonPositiveDefinite(static_cast<std::size_t>(k));
    const Vector mean = llt.solve(pk * c.mean() + base_shift);

    // c_k without the terms shared by every component (those cancel on normalization).
    const Scalar log_det_new = -2.0 * u.diagonal().array().log().sum();
    const Scalar c_k = c.log_det_covariance() - log_det_new + c.mean().dot(pk * c.mean()) -
                       mean.dot(precision * mean);
    log_weights[k] = std::log(q.weights()[k]) - 0.5 * c_k;
    components.emplace_back(mean, std::move(u));
  }
  log_weights.array() -= log_sum_exp(log_weights);
  Vector weights = log_weights.array().exp();
  return GaussianMixture(std::move(weights), std::move(components));
}

}  // namespace

GaussianMixture::GaussianMixture(Vector weights, std::vector<Gaussian> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("GaussianMixture: no components");
  if (weights_.size() != static_cast<Index>(components_.size()))
    throw DimensionMismatch("GaussianMixture", static_cast<long>(components_.size()),
                            weights_.size());
  for (const auto& c : components_)
    if (c.dim() != components_.front().dim())
      throw DimensionMismatch("GaussianMixture", components_.front().dim(), c.dim());
  if ((weights_.array() < 0.0).any() || !weights_.allFinite() || !(weights_.sum() > 0.0))
    throw std::invalid_argument("GaussianMixture: weights must be nonnegative and finite");
  weights_ /= weights_.sum();
}

GaussianMixture::GaussianMixture(Gaussian single)
    : weights_(Vector::Ones(1)), components_{std::move(single)} {}

Vector GaussianMixture::mean() const {
  Vector m = Vector::Zero(dim());
  for (Index k = 0; k < size(); ++k) m += weights_[k] * component(k).mean();
  return m;
}

Matrix GaussianMixture::covariance() const {
  const Vector m = mean();
  Matrix cov = Matrix::Zero(dim(), dim());
  for (Index k = 0; k < size(); ++k) {
    const Vector delta = component(k).mean() - m;
    cov += weights_[k] * (component(k).covariance() + delta * delta.transpose());
  }
  return cov;
}

Scalar log_pdf(const GaussianMixture& m, const Eigen::Ref<const Vector>& theta) {
  if (theta.size() != m.dim()) throw DimensionMismatch("log_pdf(GaussianMixture)", m.dim(), theta.size());
  Vector terms(m.size());
  for (Index k = 0; k < m.size(); ++k)
    terms[k] = std::log(m.weights()[k]) + log_pdf(m.component(k), theta);
  return log_sum_exp(terms);
}

Scalar marginal_pdf(const GaussianMixture& m, Index index, Scalar value) {
  Scalar density = 0.0;
  for (Index k = 0; k < m.size(); ++k) {
    const Scalar var = m.component(k).covariance()(index, index);
    const Scalar z = value - m.component(k).mean()[index];
    density += m.weights()[k] * std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * M_PI * var);
  }
  return density;
}

Vector sample(const GaussianMixture& m, Rng& rng) {
  std::discrete_distribution<Index> pick(m.weights().data(), m.weights().data() + m.size());
  return sample(m.component(pick(rng)), rng);
}

std::vector<Vector> sample(const GaussianMixture& m, Rng& rng, std::size_t n) {
  std::vector<Vector> out;
  out.reserve(n);
  if (n == 0) return out;
  std::discrete_distribution<Index> pick(m.weights().data(), m.weights().data() + m.size());
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample(m.component(pick(rng)), rng));
  return out;
}

GaussianMixture divide_mixture_by_gaussian(const GaussianMixture& q, const Gaussian& p0) {
  const SignedFactor factors[] = {{&p0, -1.0}};
  return combine(q, factors);
}

GaussianMixture multiply_and_divide(const GaussianMixture& q, const Gaussian& numerator,
                                    const Gaussian& denominator) {
  const SignedFactor factors[] = {{&numerator, 1.0}, {&denominator, -1.0}};
  return combine(q, factors);
}

// ---------------------------------------------------------------------------
// EM

namespace {

struct EmState {
  Vector weights;
  std::vector<Vector> means;
  std::vector<Matrix> covariances;
};

// Log-likelihood of the data, filling responsibilities (n x K). Returns
// -infinity if some covariance is not factorizable.
Scalar e_step(const Matrix& x, const EmState& s, Matrix& resp) {
  const Index n = x.cols();
  const Index k_count = s.weights.size();
  const Index d = x.rows();
  resp.resize(n, k_count);
  for (Index k = 0; k < k_count; ++k) {
    Eigen::LLT<Matrix> llt(s.covariances[static_cast<std::size_t>(k)]);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<Scalar>::infinity();
    const Matrix l = llt.matrixL();
    const Scalar log_det = 2.0 * l.diagonal().array().log().sum();
    const Matrix z = l.triangularView<Eigen::Lower>().solve(x.colwise() - s.means[static_cast<std::size_t>(k)]);
    resp.col(k) = (std::log(s.weights[k]) - 0.5 * static_cast<Scalar>(d) * kLog2Pi -
                   0.5 * log_det - 0.5 * z.colwise().squaredNorm().array())
                      .matrix()
                      .transpose();
  }
  Scalar total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Scalar top = resp.row(i).maxCoeff();
    const Scalar lse = top + std::log((resp.row(i).array() - top).exp().sum());
    resp.row(i) = (resp.row(i).array() - lse).exp();
    total += lse;
  }
  return total;
}

// Returns false on an empty component (index stored in `empty`).
bool m_step(const Matrix& x, const Matrix& resp, EmState& s, Index& empty) {
  const Index d = x.rows();
  const Index n = x.cols();
  for (Index k = 0; k < resp.cols(); ++k) {
    const Scalar mass = resp.col(k).sum();
    if (!(mass > 1e-10)) {
      empty = k;
      return false;
    }
    const Vector mean = x * resp.col(k) / mass;
    const Matrix centred = x.colwise() - mean;
    Matrix cov = centred * resp.col(k).asDiagonal() * centred.transpose() / mass;
    cov = 0.5 * (cov + cov.transpose());
    cov.diagonal() = cov.diagonal().cwiseMax(1e-12);
    s.weights[k] = mass / static_cast<Scalar>(n);
    s.means[static_cast<std::size_t>(k)] = mean;
    s.covariances[static_cast<std::size_t>(k)] = cov;
  }
  (void)d;
  return true;
}

// Hard responsibilities from K distinct random anchor points (nearest anchor wins).
// Uniformly random soft responsibilities start every component at the pooled
// mean, a saddle EM leaves too slowly for the stopping rule.
Matrix random_responsibilities(const Matrix& x, Index k, Rng& rng) {
  const Index n = x.cols();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  Matrix r = Matrix::Zero(n, k);
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    Scalar best_dist = std::numeric_limits<Scalar>::infinity();
    for (Index j = 0; j < k; ++j) {
      const Scalar dist = (x.col(i) - x.col(order[static_cast<std::size_t>(j)])).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    r(i, best) = 1.0;
  }
  return r;
}

// Resets component k to a random data point with the pooled data covariance.
void reinitialize(const Matrix& x, EmState& s, Index k, Rng& rng) {
  std::uniform_int_distribution<Index> pick(0, x.cols() - 1);
  const Vector pooled_mean = x.rowwise().mean();
  const Matrix centred = x.colwise() - pooled_mean;
  Matrix cov = centred * centred.transpose() / static_cast<Scalar>(x.cols());
  cov.diagonal() = cov.diagonal().cwiseMax(1e-12);
  s.means[static_cast<std::size_t>(k)] = x.col(pick(rng));
  s.covariances[static_cast<std::size_t>(k)] = cov;
  s.weights[k] = 1.0 / static_cast<Scalar>(s.weights.size());
  s.weights /= s.weights.sum();
}

}  // namespace

EmResult fit_mixture_em(std::span<const Vector> samples, Index n_components, Rng& rng,
                        const EmOptions& options) {
  if (samples.empty()) throw std::invalid_argument("fit_mixture_em: no samples");
  const Index d = samples.front().size();
  const Index n = static_cast<Index>(samples.size());
  if (n_components < 1 || n < n_components * (d + 1))
    throw std::invalid_argument("fit_mixture_em: need at least K*(D+1) samples");
  Matrix x(d, n);
  for (Index i = 0; i < n; ++i) {
    if (samples[static_cast<std::size_t>(i)].size() != d)
      throw DimensionMismatch("fit_mixture_em", d, samples[static_cast<std::size_t>(i)].size());
    x.col(i) = samples[static_cast<std::size_t>(i)];
  }

  EmResult best;
  best.log_likelihood = -std::numeric_limits<Scalar>::infinity();
  bool have_best = false;

  for (int restart = 0; restart < std::max(1, options.n_restarts); ++restart) {
    EmState s{Vector::Constant(n_components, 1.0 / static_cast<Scalar>(n_components)),
              std::vector<Vector>(static_cast<std::size_t>(n_components), Vector::Zero(d)),
              std::vector<Matrix>(static_cast<std::size_t>(n_components), Matrix::Identity(d, d))};
    Matrix resp = random_responsibilities(x, n_components, rng);
    int reinits = 0;
    Index empty = -1;
    while (!m_step(x, resp, s, empty)) {
      if (++reinits > options.max_reinitializations)
        throw EmFailure("fit_mixture_em: component stayed empty after reinitialization");
      reinitialize(x, s, empty, rng);
      e_step(x, s, resp);
    }

    std::vector<Scalar> trace;
    Scalar ll = e_step(x, s, resp);
    bool failed = !std::isfinite(ll);
    for (int it = 0; it < options.max_iterations && !failed; ++it) {
      trace.push_back(ll);
      while (!m_step(x, resp, s, empty)) {
        if (++reinits > options.max_reinitializations)
          throw EmFailure("fit_mixture_em: component stayed empty after reinitialization");
        reinitialize(x, s, empty, rng);
        e_step(x, s, resp);
        trace.clear();
      }
      const Scalar next = e_step(x, s, resp);
      if (!std::isfinite(next)) {
        failed = true;
        break;
      }
      const Scalar gain = next - ll;
      ll = next;
      if (gain < options.tolerance) {
        trace.push_back(ll);
        break;
      }
    }
    if (failed || (have_best && ll <= best.log_likelihood)) continue;

    std::vector<Gaussian> comps;
    comps.reserve(static_cast<std::size_t>(n_components));
    for (Index k = 0; k < n_components; ++k)
      comps.push_back(Gaussian::from_covariance(s.means[static_cast<std::size_t>(k)],
                                                s.covariances[static_cast<std::size_t>(k)]));
    best.mixture = GaussianMixture(s.weights, std::move(comps));
    best.log_likelihood = ll;
    best.trace = std::move(trace);
    have_best = true;
  }
  if (!have_best) throw EmFailure("fit_mixture_em: every restart produced a singular covariance");
  return best;
}

}  // namespace lfi
