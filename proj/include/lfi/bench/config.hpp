#pragma once

// Experiment configuration. Files are JSON objects; every key is optional and
// falls back to the defaults of the chosen experiment and method, but unknown
// keys are rejected. See docs/config.md for the schema.

#include "lfi/core.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lfi {

enum class ExperimentKind { mog, blr, lv, mg1 };
enum class Method { mdn_prior, proposal_prior, mdn_proposal, rejection, mcmc, smc };

std::string to_string(ExperimentKind kind);
std::string to_string(Method method);
/// Throw std::invalid_argument for unknown names.
ExperimentKind parse_experiment(const std::string& name);
Method parse_method(const std::string& name);
bool is_abc(Method method);

struct ProblemSettings {
  /// Seed of the persisted pilot statistics, inputs and observation.
  std::uint64_t seed = 1;
  Index pilot_simulations = 0;
  std::string data_dir = "data";
};

struct TrainingSettings {
  Index epochs = 1000;
  Scalar learning_rate = 1e-3;
  Index minibatch_size = 100;
};

struct NetworkSettings {
  /// Net trained from scratch (mdn_prior).
  std::vector<Index> hidden{20};
  /// Bayesian net of the proposal fixed point; mdn_proposal keeps training it.
  std::vector<Index> proposal_hidden{20};
  Index components = 1;
  Scalar svi_lambda = 0.01;
};

struct ProposalSettings {
  Index n_per_iteration = 300;
  Index max_iterations = 10;
  Scalar convergence_kl_tol = 0.05;
  TrainingSettings training;
};

struct PosteriorSettings {
  Index n_simulations = 2000;
  TrainingSettings training;
};

struct AbcSettings {
  Scalar epsilon = 1.0;
  /// Acceptances collected by rejection ABC, unless `budget` is set.
  Index n_samples = 1000;
  /// Nonzero: rejection ABC spends exactly this many simulations instead.
  long budget = 0;
  long max_simulations = 10'000'000;
  /// Parametric fit of the samples: "gaussian" or "em".
  std::string fit = "gaussian";
  Index fit_components = 1;
  Scalar mcmc_proposal_std = 0.1;
  Index mcmc_steps = 10000;
  Index smc_particles = 1000;
  /// SMC tolerances run from eps_initial down to epsilon by this factor.
  Scalar smc_eps_initial = 10.0;
  Scalar smc_decay = 0.8;
};

/// `lfi sweep` reruns the config once per value of the named setting:
/// "epsilon" (abc.epsilon) or "budget" (posterior.n_simulations for MDN
/// methods, abc.budget for rejection ABC).
struct SweepSettings {
  std::string parameter;
  std::vector<Scalar> values;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::mog;
  Method method = Method::mdn_prior;
  std::uint64_t seed = 1;
  std::string output_dir = "runs";
  ProblemSettings problem;
  NetworkSettings network;
  ProposalSettings proposal;
  PosteriorSettings posterior;
  AbcSettings abc;
  SweepSettings sweep;

  /// Throws std::invalid_argument naming the first bad setting.
  void validate() const;
};

/// Architectures and budgets used for each experiment when a file leaves them out.
ExperimentConfig default_config(ExperimentKind kind, Method method);

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Requires "experiment" and "method"; everything else defaults. Validates.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace lfi
