#include "lfi/sim/blr.hpp"

#include "lfi/errors.hpp"

#include <Eigen/Cholesky>

namespace lfi {

BlrProblem make_blr_problem(std::uint64_t seed, Index theta_dim, Index n_inputs, Scalar sigma) {
  BlrProblem p;
  Rng rng(derive_seed(seed, 0));
  p.inputs = standard_normal(n_inputs, theta_dim, rng);
  p.sigma = sigma;
  p.prior = Gaussian::standard(theta_dim);
  p.theta_true = sample(p.prior, rng);
  p.x_o = sim_blr(p, p.theta_true, rng);
  return p;
}

Vector sim_blr(const BlrProblem& p, const Vector& theta, Rng& rng) {
  if (theta.size() != p.inputs.cols()) throw DimensionMismatch("sim_blr", p.inputs.cols(), theta.size());
  return p.inputs * theta + p.sigma * standard_normal(p.inputs.rows(), rng);
}

Simulator blr_simulator(const BlrProblem& p) {
  return Simulator{"blr", p.inputs.cols(), p.inputs.rows(),
                   [p](const Vector& theta, Rng& rng) { return sim_blr(p, theta, rng); }};
}

Gaussian blr_true_posterior(const BlrProblem& p, const Vector& x_o) {
  if (x_o.size() != p.inputs.rows()) throw DimensionMismatch("blr_true_posterior", p.inputs.rows(), x_o.size());
  const Scalar beta = 1.0 / (p.sigma * p.sigma);
  const Matrix prior_precision = p.prior.precision();
  const Matrix precision = prior_precision + beta * p.inputs.transpose() * p.inputs;
  const Vector rhs = prior_precision * p.prior.mean() + beta * p.inputs.transpose() * x_o;
  return Gaussian::from_precision(precision.llt().solve(rhs), precision);
}

}  // namespace lfi
