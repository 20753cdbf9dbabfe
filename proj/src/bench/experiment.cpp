#include "lfi/bench/experiment.hpp"

#include "lfi/abc.hpp"
#include "lfi/artifacts.hpp"
#include "lfi/bench/metrics.hpp"
#include "lfi/errors.hpp"
#include "lfi/inference.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lfi {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Substreams of the run seed.
enum : std::uint64_t { kProposalStream = 1, kPosteriorStream, kAbcStream, kFitStream, kDiagnosticStream };

class Stopwatch {
 public:
  Scalar seconds() const { return std::chrono::duration<Scalar>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

TrainConfig train_config(const TrainingSettings& t) {
  TrainConfig c;
  c.n_epochs = t.epochs;
  c.learning_rate = t.learning_rate;
  c.minibatch_size = t.minibatch_size;
  return c;
}

InferenceConfig inference_config(const ExperimentConfig& cfg) {
  InferenceConfig ic;
  ic.n_per_iteration = cfg.proposal.n_per_iteration;
  ic.max_iterations = cfg.proposal.max_iterations;
  ic.convergence_kl_tol = cfg.proposal.convergence_kl_tol;
  ic.k_final = cfg.network.components;
  ic.n_final = cfg.posterior.n_simulations;
  ic.svi_lambda = cfg.network.svi_lambda;
  ic.proposal_training = train_config(cfg.proposal.training);
  ic.final_training = train_config(cfg.posterior.training);
  return ic;
}

std::vector<Vector> columns(const Matrix& m) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (Index j = 0; j < m.cols(); ++j) out.emplace_back(m.col(j));
  return out;
}

GaussianMixture fit_samples(const ExperimentConfig& cfg, const Matrix& samples, const Vector& weights, Rng& rng) {
  const Index n = samples.cols();
  const Index k = cfg.abc.fit == "em" ? cfg.abc.fit_components : 1;
  if (n < k * (samples.rows() + 1) + 1)
    throw DegenerateSample("too few samples (" + std::to_string(n) + ") for a " + std::to_string(k) +
                           "-component fit");
  const auto cols = columns(samples);
  const std::vector<Scalar> w(weights.data(), weights.data() + weights.size());
  if (cfg.abc.fit == "gaussian") return GaussianMixture(fit_gaussian_weighted(cols, w));
  const bool uniform = (weights.array() == weights[0]).all();
  if (uniform) return fit_mixture_em(cols, k, rng).mixture;
  // EM takes unweighted points: resample the population by weight
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::vector<Vector> drawn;
  drawn.reserve(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) drawn.push_back(cols[pick(rng)]);
  return fit_mixture_em(drawn, k, rng).mixture;
}

Index smc_rounds(const AbcSettings& a) {
  const Scalar r = std::log(a.epsilon / a.smc_eps_initial) / std::log(a.smc_decay);
  return 1 + static_cast<Index>(std::ceil(r - 1e-9));
}

void run_mdn(const ExperimentConfig& cfg, const Problem& pb, RunResult& out) {
  InferenceConfig ic = inference_config(cfg);
  if (cfg.method == Method::mdn_prior) {
    ic.hidden = cfg.network.hidden;
    ic.rng_seed = derive_seed(cfg.seed, kPosteriorStream);
    Stopwatch clock;
    auto r = run_algorithm2(pb.simulator, pb.prior, pb.x_o, std::nullopt, std::nullopt, ic);
    out.timings["posterior"] = clock.seconds();
    out.phase_simulations["posterior"] = r.n_simulations;
    out.posterior = std::move(r.posterior);
    return;
  }
  ic.hidden = cfg.network.proposal_hidden;
  ic.rng_seed = derive_seed(cfg.seed, kProposalStream);
  Stopwatch clock;
  auto prop = run_algorithm1(pb.simulator, pb.prior, pb.x_o, ic);
  out.timings["proposal"] = clock.seconds();
  out.phase_simulations["proposal"] = prop.n_simulations;
  out.proposal_trace = prop.trace;
  out.metrics["proposal_iterations"] = static_cast<Scalar>(prop.trace.size());
  out.metrics["proposal_converged"] = prop.converged ? 1.0 : 0.0;
  out.metrics["division_failures"] = prop.division_failures;
  if (cfg.method == Method::proposal_prior) {
    out.posterior = GaussianMixture(prop.proposal);
    return;
  }
  ic.rng_seed = derive_seed(cfg.seed, kPosteriorStream);
  Stopwatch clock2;
  auto r = run_algorithm2(pb.simulator, pb.prior, pb.x_o, prop.proposal, AnyNet(std::move(prop.net)), ic);
  out.timings["posterior"] = clock2.seconds();
  out.phase_simulations["posterior"] = r.n_simulations;
  out.posterior = std::move(r.posterior);
}

void run_abc(const ExperimentConfig& cfg, const Problem& pb, RunResult& out) {
  const AbcSettings& a = cfg.abc;
  Rng rng(derive_seed(cfg.seed, kAbcStream));
  Stopwatch clock;
  AbcResult r;
  switch (cfg.method) {
    case Method::rejection:
      r = a.budget > 0 ? rejection_abc_budget(pb.simulator, pb.prior, pb.x_o, a.epsilon, a.budget, rng)
                       : rejection_abc(pb.simulator, pb.prior, pb.x_o, a.epsilon, a.n_samples, rng, a.max_simulations);
      break;
    case Method::mcmc: {
      // started from a rejection sample
      const auto start = rejection_abc(pb.simulator, pb.prior, pb.x_o, a.epsilon, 1, rng, a.max_simulations);
      out.phase_simulations["init"] = start.n_simulations;
      McmcConfig mc{a.mcmc_proposal_std, a.mcmc_steps, start.samples.col(0)};
      r = mcmc_abc(pb.simulator, pb.prior, pb.x_o, a.epsilon, mc, rng);
      break;
    }
    case Method::smc: {
      SmcConfig sc{a.smc_particles, a.smc_eps_initial, a.smc_decay, smc_rounds(a), a.max_simulations};
      r = smc_abc(pb.simulator, pb.prior, pb.x_o, sc, rng);
      break;
    }
    default:
      throw std::logic_error("run_abc: not an ABC method");
  }
  out.timings["abc"] = clock.seconds();
  out.phase_simulations["abc"] = r.n_simulations;
  out.samples = std::move(r.samples);
  out.weights = std::move(r.weights);
  out.round_epsilons = r.round_epsilons.empty() ? std::vector<Scalar>{r.epsilon} : r.round_epsilons;
  out.round_simulations = r.round_simulations.empty() ? std::vector<long>{r.n_simulations} : r.round_simulations;
  out.metrics["epsilon"] = out.round_epsilons.back();
  out.metrics["n_samples"] = static_cast<Scalar>(out.samples.cols());
  out.metrics["ess"] = r.ess;
  out.metrics["degenerate"] = r.degenerate ? 1.0 : 0.0;
  if (out.samples.cols() == 0) {
    out.fit_error = "no accepted samples";
    return;
  }
  Rng fit_rng(derive_seed(cfg.seed, kFitStream));
  try {
    out.posterior = fit_samples(cfg, out.samples, out.weights, fit_rng);
  } catch (const Error& e) {
    out.fit_error = e.what();
  }
}

void add_metrics(const ExperimentConfig& cfg, const Problem& pb, RunResult& out) {
  if (out.posterior) {
    const auto& post = *out.posterior;
    out.metrics["max_weight"] = post.weights().maxCoeff();
    if (pb.true_density) {
      const auto* box = pb.prior.box();
      out.metrics["tv"] = total_variation_1d(pb.true_density, post, box->lower()[0], box->upper()[0]);
    }
    if (pb.true_posterior) out.metrics["kl"] = metric_kl_to_true(*pb.true_posterior, post);
    if (pb.theta_true) out.metrics["nlp"] = metric_neg_logprob_true(post, *pb.theta_true);
    if (const auto* box = pb.prior.box()) {
      Rng rng(derive_seed(cfg.seed, kDiagnosticStream));
      out.metrics["mass_outside_prior"] = mass_outside(post, *box, rng);
    }
  }
  if (is_abc(cfg.method) && out.metrics.count("ess") && out.metrics.at("ess") > 0.0)
    out.metrics["cost_per_effective_sample"] = static_cast<Scalar>(out.n_simulations) / out.metrics.at("ess");
}

json vec_json(const Vector& v) { return std::vector<Scalar>(v.data(), v.data() + v.size()); }

Vector vec_from(const json& j) {
  const auto v = j.get<std::vector<Scalar>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

json gaussian_json(const Gaussian& g) {
  json rows = json::array();
  for (Index i = 0; i < g.dim(); ++i) rows.push_back(vec_json(g.prec_chol().row(i).transpose()));
  return {{"mean", vec_json(g.mean())}, {"prec_chol", rows}};
}

Gaussian gaussian_from(const json& j) {
  const Vector mean = vec_from(j.at("mean"));
  Matrix u(mean.size(), mean.size());
  const auto& rows = j.at("prec_chol");
  for (Index i = 0; i < mean.size(); ++i) u.row(i) = vec_from(rows.at(static_cast<std::size_t>(i))).transpose();
  return Gaussian(mean, u);
}

json mixture_json(const GaussianMixture& m) {
  json comps = json::array();
  for (const auto& g : m.components()) comps.push_back(gaussian_json(g));
  return {{"weights", vec_json(m.weights())}, {"components", comps}};
}

GaussianMixture mixture_from(const json& j) {
  std::vector<Gaussian> comps;
  for (const auto& c : j.at("components")) comps.push_back(gaussian_from(c));
  return GaussianMixture(vec_from(j.at("weights")), std::move(comps));
}

std::string format_value(Scalar v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const Problem& problem) {
  cfg.validate();
  if (cfg.experiment != problem.kind) throw std::invalid_argument("run_experiment: problem does not match config");
  RunResult out;
  out.config = cfg;
  try {
    if (is_abc(cfg.method))
      run_abc(cfg, problem, out);
    else
      run_mdn(cfg, problem, out);
  } catch (const Error& e) {
    out.error = e.what();
  }
  out.n_simulations = 0;
  for (const auto& [phase, n] : out.phase_simulations) out.n_simulations += n;
  try {
    add_metrics(cfg, problem, out);
  } catch (const Error& e) {
    if (out.error.empty()) out.error = e.what();
  }
  return out;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, load_problem(cfg.experiment, cfg.problem));
}

Scalar simulation_cost(const RunResult& r) {
  if (!is_abc(r.config.method)) return static_cast<Scalar>(r.n_simulations);
  const auto ess = r.metrics.find("ess");
  if (ess == r.metrics.end() || !(ess->second > 0.0)) return std::numeric_limits<Scalar>::infinity();
  return static_cast<Scalar>(r.n_simulations) / ess->second;
}

nlohmann::json run_manifest(const RunResult& r) {
  json m;
  m["config"] = to_json(r.config);
  m["n_simulations"] = r.n_simulations;
  m["phase_simulations"] = r.phase_simulations;
  m["metrics"] = r.metrics;
  m["timings"] = r.timings;
  m["error"] = r.error;
  m["fit_error"] = r.fit_error;
  m["posterior"] = r.posterior ? mixture_json(*r.posterior) : json(nullptr);
  json trace = json::array();
  for (const auto& g : r.proposal_trace) trace.push_back(gaussian_json(g));
  m["proposal_trace"] = trace;
  m["round_epsilons"] = r.round_epsilons;
  m["round_simulations"] = r.round_simulations;
  m["samples_file"] = r.samples.size() > 0 ? json("samples.txt") : json(nullptr);
  return m;
}

void write_run(const RunResult& r) { write_run(r, r.config.output_dir); }

fs::path write_run(const RunResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  if (r.samples.size() > 0) {
    Matrix rows(r.samples.cols(), r.samples.rows() + 1);
    rows << r.samples.transpose(), r.weights;
    write_artifact(dir / "samples.txt",
                   to_string(r.config.experiment) + " " + to_string(r.config.method) +
                       " seed=" + std::to_string(r.config.seed) + " rows: theta..., weight",
                   rows);
  }
  const fs::path path = dir / "manifest.json";
  std::ofstream out(path);
  out << run_manifest(r).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
  return path;
}

RunResult read_run(const fs::path& dir) {
  const fs::path path = fs::is_directory(dir) ? dir / "manifest.json" : dir;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const json m = json::parse(in);
  RunResult r;
  r.config = config_from_json(m.at("config"));
  r.n_simulations = m.at("n_simulations").get<long>();
  r.phase_simulations = m.at("phase_simulations").get<std::map<std::string, long>>();
  r.metrics = m.at("metrics").get<std::map<std::string, Scalar>>();
  r.timings = m.at("timings").get<std::map<std::string, Scalar>>();
  r.error = m.at("error").get<std::string>();
  r.fit_error = m.at("fit_error").get<std::string>();
  if (!m.at("posterior").is_null()) r.posterior = mixture_from(m.at("posterior"));
  for (const auto& g : m.at("proposal_trace")) r.proposal_trace.push_back(gaussian_from(g));
  r.round_epsilons = m.at("round_epsilons").get<std::vector<Scalar>>();
  r.round_simulations = m.at("round_simulations").get<std::vector<long>>();
  if (!m.at("samples_file").is_null()) {
    const Matrix rows = read_artifact(path.parent_path() / m.at("samples_file").get<std::string>()).data;
    r.samples = rows.leftCols(rows.cols() - 1).transpose();
    r.weights = rows.rightCols(1);
  }
  return r;
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg) {
  if (cfg.sweep.parameter.empty()) return {cfg};
  std::vector<ExperimentConfig> out;
  for (const Scalar v : cfg.sweep.values) {
    ExperimentConfig c = cfg;
    c.sweep = {};
    c.output_dir = (fs::path(cfg.output_dir) / (cfg.sweep.parameter + "_" + format_value(v))).string();
    if (cfg.sweep.parameter == "epsilon") {
      c.abc.epsilon = v;
      c.abc.smc_eps_initial = std::max(c.abc.smc_eps_initial, v);
    } else if (cfg.method == Method::rejection) {
      c.abc.budget = static_cast<long>(v);
    } else {
      c.posterior.n_simulations = static_cast<Index>(v);
    }
    c.validate();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace lfi
