#include "lfi/sim/mog.hpp"

#include <cmath>
#include <numbers>

namespace lfi {

namespace {

Scalar normal_cdf(Scalar z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

Scalar normal_pdf(Scalar x, Scalar mean, Scalar sd) {
  const Scalar z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

Scalar sim_mog(const MogProblem& p, Scalar theta, Rng& rng) {
  const Scalar sd = uniform01(rng) < p.alpha ? p.sigma1 : p.sigma2;
  return theta + sd * std::normal_distribution<Scalar>()(rng);
}

Simulator mog_simulator(const MogProblem& p) {
  return Simulator{"mog", 1, 1, [p](const Vector& theta, Rng& rng) {
                     return Vector::Constant(1, sim_mog(p, theta[0], rng)).eval();
                   }};
}

Prior mog_prior(const MogProblem& p) {
  return UniformBoxPrior(Vector::Constant(1, p.theta_lower), Vector::Constant(1, p.theta_upper));
}

std::function<Scalar(Scalar)> mog_true_posterior(const MogProblem& p, Scalar x_o) {
  auto mass = [&](Scalar sd) {
    return normal_cdf((p.theta_upper - x_o) / sd) - normal_cdf((p.theta_lower - x_o) / sd);
  };
  const Scalar z = p.alpha * mass(p.sigma1) + (1.0 - p.alpha) * mass(p.sigma2);
  return [p, x_o, z](Scalar theta) {
    if (theta < p.theta_lower || theta > p.theta_upper) return 0.0;
    return (p.alpha * normal_pdf(theta, x_o, p.sigma1) + (1.0 - p.alpha) * normal_pdf(theta, x_o, p.sigma2)) / z;
  };
}

}  // namespace lfi
