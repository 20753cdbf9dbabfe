#include "lfi/inference.hpp"

#include "lfi/errors.hpp"

#include <stdexcept>

namespace lfi {

namespace {

enum Stream : std::uint64_t { kNetInit = 1, kSimulation, kTraining, kReplication };

TrainConfig seeded(TrainConfig cfg, std::uint64_t seed) {
  cfg.rng_seed = seed;
  return cfg;
}

}  // namespace

void InferenceConfig::validate() const {
  if (n_per_iteration < 1 || max_iterations < 1 || k_final < 1 || n_final < 1)
    throw std::invalid_argument("InferenceConfig: counts must be at least 1");
  if (!(convergence_kl_tol > 0.0)) throw std::invalid_argument("InferenceConfig: convergence_kl_tol must be positive");
  if (!(svi_lambda > 0.0)) throw std::invalid_argument("InferenceConfig: svi_lambda must be positive");
  for (Index h : hidden)
    if (h < 1) throw std::invalid_argument("InferenceConfig: hidden layer sizes must be positive");
  proposal_training.validate();
  final_training.validate();
}

GaussianMixture posterior_estimate(const GaussianMixture& q_at_xo, const Prior& prior,
                                   const std::optional<Gaussian>& proposal) {
  if (!proposal) return q_at_xo;
  if (proposal->dim() != q_at_xo.dim()) throw DimensionMismatch("posterior_estimate", q_at_xo.dim(), proposal->dim());
  if (const auto* g = prior.gaussian()) {
    if (*g == *proposal) return q_at_xo;
    return multiply_and_divide(q_at_xo, *g, *proposal);
  }
  return divide_mixture_by_gaussian(q_at_xo, *proposal);
}

bool proposal_converged(const Gaussian& prev, const Gaussian& next, Scalar tol) {
  if (prev.dim() != next.dim()) throw DimensionMismatch("proposal_converged", prev.dim(), next.dim());
  return 0.5 * (kl_divergence(prev, next) + kl_divergence(next, prev)) < tol;
}

ProposalResult run_algorithm1(const Simulator& sim, const Prior& prior, const Vector& x_o,
                              const InferenceConfig& cfg) {
  cfg.validate();
  if (x_o.size() != sim.x_dim) throw DimensionMismatch("run_algorithm1", sim.x_dim, x_o.size());
  Rng init_rng(derive_seed(cfg.rng_seed, kNetInit));
  Rng sim_rng(derive_seed(cfg.rng_seed, kSimulation));
  const MdnDims dims{sim.x_dim, sim.theta_dim, 1, cfg.hidden};

  ProposalResult result{Gaussian::standard(sim.theta_dim), svi_start(dims, init_rng, cfg.svi_lambda), {}, 0, false, 0};
  std::optional<Gaussian> current;  // empty: simulate from the prior
  bool retried = false;
  for (Index iteration = 0; iteration < cfg.max_iterations; ++iteration) {
    const SimDataset data = simulate_dataset(sim, prior, current, cfg.n_per_iteration, sim_rng);
    result.n_simulations += data.n_simulations;
    const auto train_seed = derive_seed(cfg.rng_seed, kTraining + 16 * static_cast<std::uint64_t>(iteration));
    SviNet trained = train_mdn_svi(result.net, data, seeded(cfg.proposal_training, train_seed));

    Gaussian next;
    try {
      next = posterior_estimate(forward_predict(trained, x_o), prior, current).component(0);
    } catch (const NonPositiveDefinite&) {
      ++result.division_failures;
      if (retried) throw;
      // keep the previous proposal and net, retry with a fresh batch
      retried = true;
      continue;
    }
    retried = false;
    result.net = std::move(trained);
    result.trace.push_back(next);
    const bool done = current && proposal_converged(*current, next, cfg.convergence_kl_tol);
    current = std::move(next);
    if (done) {
      result.converged = true;
      break;
    }
  }
  if (!current) throw std::runtime_error("run_algorithm1: no iteration produced a proposal");
  result.proposal = *current;
  return result;
}

GaussianMixture predict(const AnyNet& net, const Vector& x) {
  if (const auto* svi = std::get_if<SviNet>(&net)) return forward_predict(*svi, x);
  return forward(std::get<MdnNet>(net), x);
}

PosteriorResult run_algorithm2(const Simulator& sim, const Prior& prior, const Vector& x_o,
                               const std::optional<Gaussian>& proposal,
                               const std::optional<AnyNet>& init, const InferenceConfig& cfg) {
  cfg.validate();
  if (x_o.size() != sim.x_dim) throw DimensionMismatch("run_algorithm2", sim.x_dim, x_o.size());
  Rng init_rng(derive_seed(cfg.rng_seed, kNetInit));
  Rng sim_rng(derive_seed(cfg.rng_seed, kSimulation));
  Rng rep_rng(derive_seed(cfg.rng_seed, kReplication));
  const TrainConfig train = seeded(cfg.final_training, derive_seed(cfg.rng_seed, kTraining));

  const SimDataset data = simulate_dataset(sim, prior, proposal, cfg.n_final, sim_rng);
  AnyNet net = MdnNet();
  if (!init) {
    net = train_mdn(MdnNet::initialized(MdnDims{sim.x_dim, sim.theta_dim, cfg.k_final, cfg.hidden}, init_rng), data, train);
  } else if (const auto* svi = std::get_if<SviNet>(&*init)) {
    SviNet start = svi->dims().n_components == cfg.k_final ? *svi : replicate_components(*svi, cfg.k_final, rep_rng, cfg.replication_noise);
    net = train_mdn_svi(std::move(start), data, train);
  } else {
    const auto& mdn = std::get<MdnNet>(*init);
    MdnNet start = mdn.dims().n_components == cfg.k_final ? mdn : replicate_components(mdn, cfg.k_final, rep_rng, cfg.replication_noise);
    net = train_mdn(std::move(start), data, train);
  }
  return PosteriorResult{posterior_estimate(predict(net, x_o), prior, proposal), std::move(net), data.n_simulations};
}

}  // namespace lfi
