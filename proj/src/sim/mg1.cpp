#include "lfi/sim/mg1.hpp"

#include "lfi/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace lfi {

Vector mg1_interdepartures(const Mg1Problem& p, const Vector& theta, Rng& rng) {
  if (theta.size() != 3) throw DimensionMismatch("sim_mg1", 3, theta.size());
  const Scalar lo = theta[0], hi = theta[1], rate = theta[2];
  if (!(lo >= 0.0 && hi >= lo && rate > 0.0)) throw std::invalid_argument("sim_mg1: need 0 <= theta1 <= theta2, theta3 > 0");
  std::exponential_distribution<Scalar> gap(rate);
  Vector out(p.n_jobs);
  Scalar arrival = 0.0, departure = 0.0;
  for (Index i = 0; i < p.n_jobs; ++i) {
    const Scalar service = lo + (hi - lo) * uniform01(rng);
    arrival += gap(rng);
    const Scalar next = departure + service + std::max(0.0, arrival - departure);
    out[i] = next - departure;
    departure = next;
  }
  return out;
}

Vector percentiles(Vector values) {
  if (values.size() == 0) throw std::invalid_argument("percentiles: empty input");
  std::sort(values.begin(), values.end());
  const auto last = static_cast<Scalar>(values.size() - 1);
  Vector out(kMg1Stats);
  for (Index k = 0; k < kMg1Stats; ++k) {
    const Scalar pos = last * static_cast<Scalar>(k) / static_cast<Scalar>(kMg1Stats - 1);
    const auto below = static_cast<Index>(std::floor(pos));
    const Index above = std::min<Index>(below + 1, values.size() - 1);
    const Scalar frac = pos - static_cast<Scalar>(below);
    out[k] = values[below] + frac * (values[above] - values[below]);
  }
  return out;
}

Vector sim_mg1(const Mg1Problem& p, const Vector& theta, Rng& rng) {
  return percentiles(mg1_interdepartures(p, theta, rng));
}

PilotWhitener make_whitener(const Vector& mean, const Matrix& covariance) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size())
    throw DimensionMismatch("make_whitener", mean.size(), covariance.rows());
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success || (llt.matrixL().toDenseMatrix().diagonal().array() <= 0.0).any())
    throw PilotDegenerate("make_whitener: pilot covariance is not positive definite");
  return PilotWhitener{mean, llt.matrixL()};
}

Vector pilot_whiten(const Vector& stats, const PilotWhitener& pilot) {
  if (stats.size() != pilot.mean.size()) throw DimensionMismatch("pilot_whiten", pilot.mean.size(), stats.size());
  return pilot.chol.triangularView<Eigen::Lower>().solve(stats - pilot.mean);
}

Vector mg1_to_inference(const Vector& theta) { return Vector{{theta[0], theta[1] - theta[0], theta[2]}}; }

Vector mg1_from_inference(const Vector& phi) { return Vector{{phi[0], phi[0] + phi[1], phi[2]}}; }

PilotWhitener mg1_pilot(const Mg1Problem& p, Index n, Rng& rng) {
  if (n < kMg1Stats + 1) throw std::invalid_argument("mg1_pilot: too few simulations");
  const Prior prior = mg1_prior(p);
  Matrix stats(kMg1Stats, n);
  for (Index i = 0; i < n; ++i) {
    Vector phi = sample(prior, rng);
    while (!(phi[2] > 0.0)) phi = sample(prior, rng);
    stats.col(i) = sim_mg1(p, mg1_from_inference(phi), rng);
  }
  const Vector mean = stats.rowwise().mean();
  const Matrix centred = stats.colwise() - mean;
  return make_whitener(mean, centred * centred.transpose() / static_cast<Scalar>(n - 1));
}

Simulator mg1_simulator(const Mg1Problem& p, const PilotWhitener& pilot) {
  return Simulator{"mg1", 3, kMg1Stats, [p, pilot](const Vector& phi, Rng& rng) {
                     return pilot_whiten(sim_mg1(p, mg1_from_inference(phi), rng), pilot);
                   }};
}

Prior mg1_prior(const Mg1Problem& p) {
  return UniformBoxPrior(Vector::Zero(3), Vector{{p.theta1_upper, p.gap_upper, p.theta3_upper}});
}

}  // namespace lfi
