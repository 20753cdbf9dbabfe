#include "lfi/abc.hpp"

#include "lfi/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lfi {

namespace {

// Simulates and returns the distance; exploded draws count as rejections.
Scalar simulate_distance(const Simulator& sim, const Vector& theta, const Vector& x_o, Rng& rng) {
  try {
    return abc_distance(sim.simulate(theta, rng), x_o);
  } catch (const SimulationExploded&) {
    return std::numeric_limits<Scalar>::infinity();
  }
}

void check_inputs(const char* where, const Simulator& sim, const Prior& prior, const Vector& x_o) {
  if (prior.dim() != sim.theta_dim) throw DimensionMismatch(where, sim.theta_dim, prior.dim());
  if (x_o.size() != sim.x_dim) throw DimensionMismatch(where, sim.x_dim, x_o.size());
}

Vector uniform_weights(Index n) { return Vector::Constant(n, 1.0 / static_cast<Scalar>(n)); }

Scalar log_sum_exp(const Vector& v) {
  const Scalar top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

}  // namespace

Scalar abc_distance(const Vector& x, const Vector& x_o) {
  if (x.size() != x_o.size()) throw DimensionMismatch("abc_distance", x_o.size(), x.size());
  return (x - x_o).norm();
}

AbcResult rejection_abc(const Simulator& sim, const Prior& prior, const Vector& x_o, Scalar epsilon,
                        Index n_accept, Rng& rng, long max_simulations) {
  check_inputs("rejection_abc", sim, prior, x_o);
  if (!(epsilon > 0.0)) throw std::invalid_argument("rejection_abc: epsilon must be positive");
  if (n_accept < 1) throw std::invalid_argument("rejection_abc: need at least one acceptance");
  AbcResult out;
  out.samples.resize(sim.theta_dim, n_accept);
  out.epsilon = epsilon;
  Index accepted = 0;
  while (accepted < n_accept) {
    if (out.n_simulations >= max_simulations) throw BudgetExhausted(out.n_simulations, static_cast<long>(accepted));
    Vector theta = sample(prior, rng);
    ++out.n_simulations;
    if (simulate_distance(sim, theta, x_o, rng) < epsilon) out.samples.col(accepted++) = theta;
  }
  out.weights = uniform_weights(n_accept);
  out.ess = static_cast<Scalar>(n_accept);
  return out;
}

AbcResult rejection_abc_budget(const Simulator& sim, const Prior& prior, const Vector& x_o, Scalar epsilon,
                               long n_simulations, Rng& rng) {
  check_inputs("rejection_abc_budget", sim, prior, x_o);
  if (!(epsilon > 0.0)) throw std::invalid_argument("rejection_abc_budget: epsilon must be positive");
  if (n_simulations < 1) throw std::invalid_argument("rejection_abc_budget: budget must be positive");
  std::vector<Vector> kept;
  for (long i = 0; i < n_simulations; ++i) {
    Vector theta = sample(prior, rng);
    if (simulate_distance(sim, theta, x_o, rng) < epsilon) kept.push_back(std::move(theta));
  }
  AbcResult out;
  out.n_simulations = n_simulations;
  out.epsilon = epsilon;
  out.samples.resize(sim.theta_dim, static_cast<Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) out.samples.col(static_cast<Index>(j)) = kept[j];
  if (!kept.empty()) out.weights = uniform_weights(static_cast<Index>(kept.size()));
  out.ess = static_cast<Scalar>(kept.size());
  out.degenerate = kept.empty();
  return out;
}

void McmcConfig::validate() const {
  if (!(proposal_std > 0.0)) throw std::invalid_argument("McmcConfig: proposal_std must be positive");
  if (n_steps < 1) throw std::invalid_argument("McmcConfig: n_steps must be positive");
}

AbcResult mcmc_abc(const Simulator& sim, const Prior& prior, const Vector& x_o, Scalar epsilon,
                   const McmcConfig& cfg, Rng& rng) {
  check_inputs("mcmc_abc", sim, prior, x_o);
  cfg.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("mcmc_abc: epsilon must be positive");
  if (cfg.init.size() != sim.theta_dim) throw DimensionMismatch("mcmc_abc init", sim.theta_dim, cfg.init.size());
  Vector theta = cfg.init;
  Scalar log_prior = log_pdf(prior, theta);
  if (!std::isfinite(log_prior)) throw std::invalid_argument("mcmc_abc: init outside the prior support");

  AbcResult out;
  out.samples.resize(sim.theta_dim, cfg.n_steps);
  out.epsilon = epsilon;
  long n_accepted = 0;
  for (Index step = 0; step < cfg.n_steps; ++step) {
    const Vector candidate = theta + cfg.proposal_std * standard_normal(sim.theta_dim, rng);
    const Scalar candidate_log_prior = log_pdf(prior, candidate);
    if (std::isfinite(candidate_log_prior)) {
      ++out.n_simulations;
      if (simulate_distance(sim, candidate, x_o, rng) < epsilon &&
          std::log(uniform01(rng)) < candidate_log_prior - log_prior) {
        theta = candidate;
        log_prior = candidate_log_prior;
        ++n_accepted;
      }
    }
    out.samples.col(step) = theta;
  }
  out.weights = uniform_weights(cfg.n_steps);
  out.degenerate = n_accepted == 0;
  if (out.degenerate || cfg.n_steps < 10) {
    out.ess = 1.0;
  } else {
    try {
      out.ess = ess_mcmc(out.samples);
    } catch (const DegenerateChain&) {
      out.ess = 1.0;
      out.degenerate = true;
    }
  }
  return out;
}

void SmcConfig::validate() const {
  if (n_particles < 2) throw std::invalid_argument("SmcConfig: need at least two particles");
  if (!(eps_initial > 0.0)) throw std::invalid_argument("SmcConfig: eps_initial must be positive");
  if (!(eps_decay > 0.0 && eps_decay < 1.0)) throw std::invalid_argument("SmcConfig: eps_decay must lie in (0, 1)");
  if (n_rounds < 1) throw std::invalid_argument("SmcConfig: n_rounds must be positive");
  if (max_simulations < 1) throw std::invalid_argument("SmcConfig: max_simulations must be positive");
}

AbcResult smc_abc(const Simulator& sim, const Prior& prior, const Vector& x_o, const SmcConfig& cfg, Rng& rng) {
  check_inputs("smc_abc", sim, prior, x_o);
  cfg.validate();
  const Index n = cfg.n_particles;
  const Index d = sim.theta_dim;

  AbcResult out = rejection_abc(sim, prior, x_o, cfg.eps_initial, n, rng, cfg.max_simulations);
  out.round_epsilons.push_back(cfg.eps_initial);
  out.round_simulations.push_back(out.n_simulations);

  std::discrete_distribution<Index> pick;
  Scalar epsilon = cfg.eps_initial;
  for (Index round = 1; round < cfg.n_rounds; ++round) {
    epsilon *= cfg.eps_decay;
    const Vector mean = out.samples * out.weights;
    const Matrix centred = out.samples.colwise() - mean;
    const Vector kernel_var = 2.0 * (centred.array().square().matrix() * out.weights);
    if ((kernel_var.array() <= 0.0).any()) {
      out.degenerate = true;
      break;
    }
    const Vector kernel_sd = kernel_var.cwiseSqrt();
    pick = std::discrete_distribution<Index>(out.weights.data(), out.weights.data() + n);

    Matrix next(d, n);
    Vector log_weights(n);
    long spent = 0;
    bool exhausted = false;
    for (Index i = 0; i < n && !exhausted; ++i) {
      for (;;) {
        if (out.n_simulations + spent >= cfg.max_simulations) {
          exhausted = true;
          break;
        }
        const Vector candidate =
            out.samples.col(pick(rng)) + kernel_sd.cwiseProduct(standard_normal(d, rng));
        const Scalar lp = log_pdf(prior, candidate);
        if (!std::isfinite(lp)) continue;
        ++spent;
        if (simulate_distance(sim, candidate, x_o, rng) >= epsilon) continue;
        // log sum_j w_j K(candidate | theta_j); the kernel's constant cancels
        Vector terms(n);
        for (Index j = 0; j < n; ++j) {
          const Vector z = (candidate - out.samples.col(j)).cwiseQuotient(kernel_sd);
          terms[j] = std::log(out.weights[j]) - 0.5 * z.squaredNorm();
        }
        next.col(i) = candidate;
        log_weights[i] = lp - log_sum_exp(terms);
        break;
      }
    }
    if (exhausted) {
      out.n_simulations += spent;
      out.degenerate = true;
      break;
    }
    out.n_simulations += spent;
    Vector w = (log_weights.array() - log_sum_exp(log_weights)).exp();
    w /= w.sum();
    out.samples = std::move(next);
    out.weights = std::move(w);
    out.epsilon = epsilon;
    out.round_epsilons.push_back(epsilon);
    out.round_simulations.push_back(spent);
  }
  out.ess = ess_weighted(out.weights);
  return out;
}

Scalar ess_mcmc(const Matrix& chain) {
  const Index n = chain.cols();
  if (n < 10) throw std::invalid_argument("ess_mcmc: chain must have at least 10 states");
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Index dim = 0; dim < chain.rows(); ++dim) {
    const Eigen::ArrayXd x = chain.row(dim).transpose().array() - chain.row(dim).mean();
    const Scalar c0 = x.square().sum() / static_cast<Scalar>(n);
    if (!(c0 > 0.0)) throw DegenerateChain("ess_mcmc: zero variance in dimension " + std::to_string(dim));
    Scalar sum = 0.0;
    for (Index lag = 1; lag < n; ++lag) {
      const Scalar r = (x.head(n - lag) * x.tail(n - lag)).sum() / (static_cast<Scalar>(n) * c0);
      if (r <= 0.0) break;
      sum += r;
    }
    best = std::min(best, static_cast<Scalar>(n) / (1.0 + 2.0 * sum));
  }
  return best;
}

Scalar ess_weighted(const Vector& weights) {
  if (weights.size() == 0) throw std::invalid_argument("ess_weighted: empty weights");
  return 1.0 / weights.squaredNorm();
}

}  // namespace lfi
