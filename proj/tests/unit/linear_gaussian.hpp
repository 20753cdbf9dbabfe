#pragma once

// Conjugate 1-D problem used as a training oracle:
// theta ~ N(prior_mean, prior_var), x = theta + N(0, noise_var).

#include "lfi/dataset.hpp"
#include "lfi/gaussian.hpp"
#include "lfi/simulator.hpp"

namespace lfi::test {

struct LinearGaussian {
  double prior_mean = 0.0;
  double prior_var = 1.0;
  double noise_var = 0.01;

  /// Analytic posterior at x under a N(mean, var) prior.
  Gaussian posterior(double x, double mean, double var) const {
    const double precision = 1.0 / var + 1.0 / noise_var;
    const double m = (mean / var + x / noise_var) / precision;
    return Gaussian::isotropic(Vector::Constant(1, m), 1.0 / precision);
  }
  Gaussian posterior(double x) const { return posterior(x, prior_mean, prior_var); }

  SimDataset dataset(Index n, Rng& rng, double mean, double var) const {
    SimDataset d;
    d.thetas.resize(1, n);
    d.xs.resize(1, n);
    std::normal_distribution<double> z;
    for (Index i = 0; i < n; ++i) {
      const double theta = mean + std::sqrt(var) * z(rng);
      d.thetas(0, i) = theta;
      d.xs(0, i) = theta + std::sqrt(noise_var) * z(rng);
    }
    d.n_simulations = n;
    return d;
  }
  SimDataset dataset(Index n, Rng& rng) const { return dataset(n, rng, prior_mean, prior_var); }

  Prior prior() const { return Gaussian::isotropic(Vector::Constant(1, prior_mean), prior_var); }

  Simulator simulator() const {
    const double sd = std::sqrt(noise_var);
    return Simulator{"linear_gaussian", 1, 1, [sd](const Vector& theta, Rng& rng) {
                       return Vector(theta + sd * standard_normal(1, rng));
                     }};
  }
};

}  // namespace lfi::test
