#include "lfi/bench/config.hpp"

#include <array>
#include <fstream>
#include <stdexcept>
#include <utility>

namespace lfi {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<ExperimentKind, const char*>, 4> kExperiments{{
    {ExperimentKind::mog, "mog"},
    {ExperimentKind::blr, "blr"},
    {ExperimentKind::lv, "lv"},
    {ExperimentKind::mg1, "mg1"},
}};

constexpr std::array<std::pair<Method, const char*>, 6> kMethods{{
    {Method::mdn_prior, "mdn_prior"},
    {Method::proposal_prior, "proposal_prior"},
    {Method::mdn_proposal, "mdn_proposal"},
    {Method::rejection, "rejection"},
    {Method::mcmc, "mcmc"},
    {Method::smc, "smc"},
}};

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("config: " + what);
}

void check_training(const TrainingSettings& t, const std::string& where) {
  require(t.epochs >= 1, where + ".epochs must be >= 1");
  require(t.learning_rate > 0.0, where + ".learning_rate must be positive");
  require(t.minibatch_size >= 1, where + ".minibatch_size must be >= 1");
}

void check_hidden(const std::vector<Index>& h, const std::string& where) {
  for (const Index n : h) require(n >= 1, where + " layer sizes must be >= 1");
}

// Every key of `given` must exist in `known`, recursively through objects.
void reject_unknown(const json& given, const json& known, const std::string& path) {
  for (const auto& [key, value] : given.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!known.contains(key)) throw std::invalid_argument("config: unknown key '" + here + "'");
    if (value.is_object() && known.at(key).is_object()) reject_unknown(value, known.at(key), here);
  }
}

json training_json(const TrainingSettings& t) {
  return {{"epochs", t.epochs}, {"learning_rate", t.learning_rate}, {"minibatch_size", t.minibatch_size}};
}

TrainingSettings training_from(const json& j) {
  return {j.at("epochs").get<Index>(), j.at("learning_rate").get<Scalar>(), j.at("minibatch_size").get<Index>()};
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kExperiments)
    if (k == kind) return name;
  throw std::invalid_argument("unknown experiment kind");
}

std::string to_string(Method method) {
  for (const auto& [m, name] : kMethods)
    if (m == method) return name;
  throw std::invalid_argument("unknown method");
}

ExperimentKind parse_experiment(const std::string& name) {
  for (const auto& [k, n] : kExperiments)
    if (name == n) return k;
  throw std::invalid_argument("config: unknown experiment '" + name + "' (mog, blr, lv, mg1)");
}

Method parse_method(const std::string& name) {
  for (const auto& [m, n] : kMethods)
    if (name == n) return m;
  throw std::invalid_argument("config: unknown method '" + name +
                              "' (mdn_prior, proposal_prior, mdn_proposal, rejection, mcmc, smc)");
}

bool is_abc(Method method) {
  return method == Method::rejection || method == Method::mcmc || method == Method::smc;
}

void ExperimentConfig::validate() const {
  require(problem.pilot_simulations >= 0, "problem.pilot_simulations must be >= 0");
  if (experiment == ExperimentKind::lv || experiment == ExperimentKind::mg1)
    require(problem.pilot_simulations >= 2, "problem.pilot_simulations must be >= 2 for this experiment");
  require(!problem.data_dir.empty(), "problem.data_dir must not be empty");
  check_hidden(network.hidden, "network.hidden");
  check_hidden(network.proposal_hidden, "network.proposal_hidden");
  require(network.components >= 1, "network.components must be >= 1");
  require(network.svi_lambda > 0.0, "network.svi_lambda must be positive");
  require(proposal.n_per_iteration >= 1, "proposal.n_per_iteration must be >= 1");
  require(proposal.max_iterations >= 1, "proposal.max_iterations must be >= 1");
  require(proposal.convergence_kl_tol > 0.0, "proposal.convergence_kl_tol must be positive");
  check_training(proposal.training, "proposal.training");
  require(posterior.n_simulations >= 1, "posterior.n_simulations must be >= 1");
  check_training(posterior.training, "posterior.training");
  require(abc.epsilon > 0.0, "abc.epsilon must be positive");
  require(abc.n_samples >= 1, "abc.n_samples must be >= 1");
  require(abc.budget >= 0, "abc.budget must be >= 0");
  require(abc.max_simulations >= 1, "abc.max_simulations must be >= 1");
  require(abc.fit == "gaussian" || abc.fit == "em", "abc.fit must be \"gaussian\" or \"em\"");
  require(abc.fit_components >= 1, "abc.fit_components must be >= 1");
  require(abc.mcmc_proposal_std > 0.0, "abc.mcmc_proposal_std must be positive");
  require(abc.mcmc_steps >= 10, "abc.mcmc_steps must be >= 10");
  require(abc.smc_particles >= 2, "abc.smc_particles must be >= 2");
  if (method == Method::smc) require(abc.smc_eps_initial >= abc.epsilon, "abc.smc_eps_initial must be >= abc.epsilon");
  require(abc.smc_decay > 0.0 && abc.smc_decay < 1.0, "abc.smc_decay must lie in (0, 1)");
  if (!sweep.parameter.empty()) {
    require(sweep.parameter == "epsilon" || sweep.parameter == "budget",
            "sweep.parameter must be \"epsilon\" or \"budget\"");
    require(!sweep.values.empty(), "sweep.values must not be empty");
    for (const Scalar v : sweep.values) require(v > 0.0, "sweep.values must be positive");
    if (sweep.parameter == "epsilon") require(is_abc(method), "an epsilon sweep needs an ABC method");
    if (sweep.parameter == "budget")
      require(method == Method::mdn_prior || method == Method::mdn_proposal || method == Method::rejection,
              "a budget sweep needs mdn_prior, mdn_proposal or rejection");
  } else {
    require(sweep.values.empty(), "sweep.values given without sweep.parameter");
  }
}

// Tuned by us where the published setup gives no number: epochs, ABC
// tolerances, MCMC step sizes and SMC schedules.
ExperimentConfig default_config(ExperimentKind kind, Method method) {
  ExperimentConfig c;
  c.experiment = kind;
  c.method = method;
  c.output_dir = "runs/" + to_string(kind) + "/" + to_string(method);
  switch (kind) {
    case ExperimentKind::mog:
      c.network = {{20}, {20}, 2, 1.0};
      c.proposal = {200, 8, 0.05, {300, 1e-3, 100}};
      c.posterior = method == Method::mdn_prior ? PosteriorSettings{10000, {1000, 1e-3, 100}}
                                                : PosteriorSettings{1000, {2000, 1e-3, 100}};
      c.abc.epsilon = 0.1;
      c.abc.n_samples = 1000;
      c.abc.fit = "em";
      c.abc.fit_components = 2;
      c.abc.mcmc_proposal_std = 0.5;
      c.abc.smc_eps_initial = 5.0;
      break;
    case ExperimentKind::blr:
      c.network = {{50}, {50}, 1, 0.01};
      c.proposal = {200, 5, 0.05, {500, 1e-3, 100}};
      c.posterior = method == Method::mdn_prior ? PosteriorSettings{50000, {300, 1e-3, 100}}
                                                : PosteriorSettings{4000, {500, 1e-3, 100}};
      c.abc.epsilon = 3.0;
      c.abc.n_samples = 300;
      c.abc.mcmc_proposal_std = 0.1;
      c.abc.smc_eps_initial = 30.0;
      break;
    case ExperimentKind::lv:
      c.problem.pilot_simulations = 1000;
      c.network = {{50, 50}, {50}, 1, 0.01};
      c.proposal = {300, 8, 0.05, {500, 1e-3, 100}};
      c.posterior = method == Method::mdn_prior ? PosteriorSettings{5000, {300, 1e-3, 100}}
                                                : PosteriorSettings{1000, {1000, 1e-3, 100}};
      c.abc.epsilon = 3.0;
      c.abc.n_samples = 100;
      c.abc.mcmc_proposal_std = 0.1;
      c.abc.smc_eps_initial = 8.0;
      break;
    case ExperimentKind::mg1:
      c.problem.pilot_simulations = 100000;
      c.network = {{50, 50}, {50}, 8, 0.01};
      c.proposal = {300, 8, 0.05, {500, 1e-3, 100}};
      c.posterior = method == Method::mdn_prior ? PosteriorSettings{5000, {300, 1e-3, 100}}
                                                : PosteriorSettings{1000, {1000, 1e-3, 100}};
      c.abc.epsilon = 0.03;
      c.abc.n_samples = 200;
      c.abc.fit = "em";
      c.abc.fit_components = 8;
      c.abc.mcmc_proposal_std = 0.2;
      c.abc.smc_eps_initial = 3.0;
      break;
  }
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return json{
      {"experiment", to_string(c.experiment)},
      {"method", to_string(c.method)},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"problem",
       {{"seed", c.problem.seed}, {"pilot_simulations", c.problem.pilot_simulations}, {"data_dir", c.problem.data_dir}}},
      {"network",
       {{"hidden", c.network.hidden},
        {"proposal_hidden", c.network.proposal_hidden},
        {"components", c.network.components},
        {"svi_lambda", c.network.svi_lambda}}},
      {"proposal",
       {{"n_per_iteration", c.proposal.n_per_iteration},
        {"max_iterations", c.proposal.max_iterations},
        {"convergence_kl_tol", c.proposal.convergence_kl_tol},
        {"training", training_json(c.proposal.training)}}},
      {"posterior", {{"n_simulations", c.posterior.n_simulations}, {"training", training_json(c.posterior.training)}}},
      {"abc",
       {{"epsilon", c.abc.epsilon},
        {"n_samples", c.abc.n_samples},
        {"budget", c.abc.budget},
        {"max_simulations", c.abc.max_simulations},
        {"fit", c.abc.fit},
        {"fit_components", c.abc.fit_components},
        {"mcmc_proposal_std", c.abc.mcmc_proposal_std},
        {"mcmc_steps", c.abc.mcmc_steps},
        {"smc_particles", c.abc.smc_particles},
        {"smc_eps_initial", c.abc.smc_eps_initial},
        {"smc_decay", c.abc.smc_decay}}},
      {"sweep", {{"parameter", c.sweep.parameter}, {"values", c.sweep.values}}},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& given) {
  require(given.is_object(), "top level must be an object");
  require(given.contains("experiment") && given.contains("method"), "\"experiment\" and \"method\" are required");
  const auto kind = parse_experiment(given.at("experiment").get<std::string>());
  const auto method = parse_method(given.at("method").get<std::string>());
  json j = to_json(default_config(kind, method));
  reject_unknown(given, j, "");
  j.merge_patch(given);

  ExperimentConfig c;
  try {
    c.experiment = kind;
    c.method = method;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.output_dir = j.at("output_dir").get<std::string>();
    const auto& p = j.at("problem");
    c.problem = {p.at("seed").get<std::uint64_t>(), p.at("pilot_simulations").get<Index>(),
                 p.at("data_dir").get<std::string>()};
    const auto& n = j.at("network");
    c.network = {n.at("hidden").get<std::vector<Index>>(), n.at("proposal_hidden").get<std::vector<Index>>(),
                 n.at("components").get<Index>(), n.at("svi_lambda").get<Scalar>()};
    const auto& pr = j.at("proposal");
    c.proposal = {pr.at("n_per_iteration").get<Index>(), pr.at("max_iterations").get<Index>(),
                  pr.at("convergence_kl_tol").get<Scalar>(), training_from(pr.at("training"))};
    const auto& po = j.at("posterior");
    c.posterior = {po.at("n_simulations").get<Index>(), training_from(po.at("training"))};
    const auto& a = j.at("abc");
    c.abc.epsilon = a.at("epsilon").get<Scalar>();
    c.abc.n_samples = a.at("n_samples").get<Index>();
    c.abc.budget = a.at("budget").get<long>();
    c.abc.max_simulations = a.at("max_simulations").get<long>();
    c.abc.fit = a.at("fit").get<std::string>();
    c.abc.fit_components = a.at("fit_components").get<Index>();
    c.abc.mcmc_proposal_std = a.at("mcmc_proposal_std").get<Scalar>();
    c.abc.mcmc_steps = a.at("mcmc_steps").get<Index>();
    c.abc.smc_particles = a.at("smc_particles").get<Index>();
    c.abc.smc_eps_initial = a.at("smc_eps_initial").get<Scalar>();
    c.abc.smc_decay = a.at("smc_decay").get<Scalar>();
    const auto& s = j.at("sweep");
    c.sweep = {s.at("parameter").get<std::string>(), s.at("values").get<std::vector<Scalar>>()};
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace lfi
