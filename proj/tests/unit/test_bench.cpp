#include "doctest.h"
#include "oracles.hpp"

#include "lfi/artifacts.hpp"
#include "lfi/bench/experiment.hpp"
#include "lfi/bench/metrics.hpp"
#include "lfi/bench/plot.hpp"
#include "lfi/bench/problem.hpp"
#include "lfi/errors.hpp"

#include <Eigen/LU>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace lfi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lfi_test_bench_" + name);
  fs::remove_all(p);
  return p;
}

// Closed-form KL(p || q) written out independently of the library.
double kl_direct(const Vector& mp, const Matrix& sp, const Vector& mq, const Matrix& sq) {
  const Matrix sq_inv = sq.inverse();
  const double d = static_cast<double>(mp.size());
  const Vector diff = mq - mp;
  return 0.5 * ((sq_inv * sp).trace() + diff.dot(sq_inv * diff) - d + std::log(sq.determinant() / sp.determinant()));
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

ExperimentConfig small_mog(Method m, const fs::path& root) {
  ExperimentConfig c = default_config(ExperimentKind::mog, m);
  c.problem.data_dir = (root / "data").string();
  c.output_dir = (root / to_string(m)).string();
  c.abc.n_samples = 200;
  c.abc.epsilon = 0.5;
  c.abc.mcmc_steps = 500;
  c.abc.smc_particles = 200;
  c.abc.smc_eps_initial = 2.0;
  c.abc.smc_decay = 0.5;
  c.posterior = {500, {20, 1e-3, 100}};
  c.proposal = {200, 2, 0.05, {20, 1e-3, 100}};
  return c;
}

}  // namespace

TEST_CASE("config defaults carry the published architectures") {
  const auto mog = default_config(ExperimentKind::mog, Method::mdn_prior);
  CHECK(mog.network.hidden == std::vector<Index>{20});
  CHECK(mog.network.components == 2);
  CHECK(mog.posterior.n_simulations == 10000);
  const auto blr = default_config(ExperimentKind::blr, Method::mdn_proposal);
  CHECK(blr.network.proposal_hidden == std::vector<Index>{50});
  CHECK(blr.network.components == 1);
  const auto lv = default_config(ExperimentKind::lv, Method::mdn_prior);
  CHECK(lv.network.hidden == std::vector<Index>{50, 50});
  CHECK(lv.network.proposal_hidden == std::vector<Index>{50});
  CHECK(lv.problem.pilot_simulations == 1000);
  const auto mg1 = default_config(ExperimentKind::mg1, Method::mdn_proposal);
  CHECK(mg1.network.components == 8);
  CHECK(mg1.problem.pilot_simulations == 100000);
  for (auto k : {ExperimentKind::mog, ExperimentKind::blr, ExperimentKind::lv, ExperimentKind::mg1})
    for (auto m : {Method::mdn_prior, Method::proposal_prior, Method::mdn_proposal, Method::rejection, Method::mcmc,
                   Method::smc})
      CHECK_NOTHROW(default_config(k, m).validate());
}

TEST_CASE("config round trip and validation") {
  ExperimentConfig c = default_config(ExperimentKind::lv, Method::smc);
  c.seed = 17;
  c.abc.epsilon = 1.5;
  c.sweep = {"epsilon", {3.0, 2.0}};
  const nlohmann::json j = to_json(c);
  CHECK(to_json(config_from_json(j)) == j);

  // partial files fill in defaults
  const auto partial = config_from_json({{"experiment", "blr"}, {"method", "rejection"}, {"abc", {{"epsilon", 4.0}}}});
  CHECK(partial.abc.epsilon == 4.0);
  CHECK(partial.abc.n_samples == default_config(ExperimentKind::blr, Method::rejection).abc.n_samples);

  CHECK_THROWS_AS(config_from_json({{"experiment", "blr"}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"experiment", "nope"}, {"method", "smc"}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"experiment", "blr"}, {"method", "smc"}, {"abc", {{"epsilon", -1.0}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"experiment", "blr"}, {"method", "smc"}, {"abc", {{"epsilonn", 1.0}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"experiment", "blr"}, {"method", "smc"}, {"abc", {{"fit", "kde"}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"experiment", "blr"}, {"method", "mdn_prior"}, {"network", {{"hidden", "50"}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      config_from_json({{"experiment", "blr"}, {"method", "mdn_prior"}, {"sweep", {{"parameter", "epsilon"}, {"values", {1.0}}}}}),
      std::invalid_argument);
}

TEST_CASE("config files allow comments") {
  const fs::path dir = scratch("config_file");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << "// tuned by hand\n{\"experiment\": \"mog\", \"method\": \"rejection\", \"seed\": 3}\n";
  CHECK(load_config(dir / "c.json").seed == 3);
}

TEST_CASE("sweep expansion") {
  ExperimentConfig c = default_config(ExperimentKind::mog, Method::rejection);
  c.output_dir = "out";
  c.sweep = {"epsilon", {1.0, 0.5}};
  const auto eps = expand_sweep(c);
  REQUIRE(eps.size() == 2);
  CHECK(eps[1].abc.epsilon == 0.5);
  CHECK(eps[1].output_dir == (fs::path("out") / "epsilon_0.5").string());
  CHECK(eps[0].sweep.parameter.empty());

  c.sweep = {"budget", {5000}};
  CHECK(expand_sweep(c)[0].abc.budget == 5000);
  ExperimentConfig m = default_config(ExperimentKind::mog, Method::mdn_prior);
  m.sweep = {"budget", {300, 3000}};
  CHECK(expand_sweep(m)[1].posterior.n_simulations == 3000);
}

TEST_CASE("kl metric") {
  Rng rng(1);
  const Matrix s_true = lfi::test::random_spd(3, rng);
  const Gaussian truth = Gaussian::from_covariance(Vector{{0.1, -0.2, 0.3}}, s_true);
  CHECK(metric_kl_to_true(truth, GaussianMixture(truth)) == doctest::Approx(0.0).scale(1.0));
  const Gaussian prior = Gaussian::standard(3);
  CHECK(metric_kl_to_true(truth, GaussianMixture(prior)) ==
        doctest::Approx(kl_direct(truth.mean(), s_true, prior.mean(), Matrix::Identity(3, 3))).epsilon(1e-10));

  // sampling then fitting, as for ABC, converges to zero
  std::vector<Vector> xs;
  for (int i = 0; i < 100000; ++i) xs.push_back(sample(truth, rng));
  CHECK(metric_kl_to_true(truth, GaussianMixture(fit_gaussian(xs))) < 0.01);

  // a mixture is compared through its moments
  const GaussianMixture two(Vector{{0.5, 0.5}}, {Gaussian::isotropic(Vector::Constant(1, -1.0), 1.0),
                                                 Gaussian::isotropic(Vector::Constant(1, 1.0), 1.0)});
  const Gaussian wide = Gaussian::isotropic(Vector::Zero(1), 2.0);
  CHECK(metric_kl_to_true(wide, two) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("negative log probability metric") {
  const Vector t{{0.5, -1.0, 2.0, 0.0}};
  CHECK(metric_neg_logprob_true(GaussianMixture(Gaussian::isotropic(t, 1.0)), t) ==
        doctest::Approx(2.0 * std::log(2.0 * M_PI)).epsilon(1e-12));
  CHECK(metric_neg_logprob_true(GaussianMixture(Gaussian::isotropic(t, 1e-6)), t) < -20.0);
  const Matrix s{{2.0, 0.3, 0.0, 0.0}, {0.3, 1.0, 0.1, 0.0}, {0.0, 0.1, 1.5, 0.2}, {0.0, 0.0, 0.2, 0.7}};
  const double base = metric_neg_logprob_true(GaussianMixture(Gaussian::from_covariance(t, s)), t);
  const double broad = metric_neg_logprob_true(GaussianMixture(Gaussian::from_covariance(t, 4.0 * s)), t);
  CHECK(broad - base == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("total variation on a grid") {
  const GaussianMixture q(Gaussian::isotropic(Vector::Zero(1), 1.0));
  auto same = [](double t) { return lfi::test::normal_pdf(t, 0.0, 1.0); };
  CHECK(total_variation_1d(same, q, -10.0, 10.0) < 1e-12);
  // N(0,1) vs N(1,1): 2 Phi(1/2) - 1, up to the grid error at the crossing point
  auto shifted = [](double t) { return lfi::test::normal_pdf(t, 1.0, 1.0); };
  CHECK(total_variation_1d(shifted, q, -10.0, 10.0) == doctest::Approx(std::erf(0.5 / std::sqrt(2.0))).epsilon(1e-4));
}

TEST_CASE("mass outside a box") {
  Rng rng(2);
  const GaussianMixture m(Gaussian::isotropic(Vector::Zero(1), 1.0));
  const UniformBoxPrior box(Vector::Constant(1, 0.0), Vector::Constant(1, 100.0));
  CHECK(std::abs(mass_outside(m, box, rng, 20000) - 0.5) < 0.02);
}

TEST_CASE("artifact files") {
  const fs::path dir = scratch("artifacts");
  Matrix m{{1.0 / 3.0, -2.5e-300}, {1e300, 0.1}};
  write_artifact(dir / "a" / "m.txt", "header with words", m);
  const Artifact a = read_artifact(dir / "a" / "m.txt");
  CHECK(a.header == "header with words");
  CHECK(a.data == m);
  std::ofstream(dir / "ragged.txt") << "# h\n1 2\n3\n";
  CHECK_THROWS(read_artifact(dir / "ragged.txt"));
  CHECK_THROWS(read_artifact(dir / "missing.txt"));
}

TEST_CASE("problem data is persisted and reused") {
  const fs::path root = scratch("problem");
  ProblemSettings s{7, 0, (root / "data").string()};
  const Problem blr = load_problem(ExperimentKind::blr, s);
  CHECK(fs::exists(root / "data" / "blr_seed7" / "inputs.txt"));
  CHECK(blr.x_o.size() == 10);
  CHECK(blr.theta_true->size() == 6);
  const Problem again = load_problem(ExperimentKind::blr, s);
  CHECK(again.x_o == blr.x_o);
  CHECK(again.true_posterior->mean() == blr.true_posterior->mean());

  const Problem mog = load_problem(ExperimentKind::mog, s);
  CHECK(mog.x_o[0] == 0.0);
  CHECK(mog.true_density(0.0) == doctest::Approx(2.194).epsilon(1e-3));

  ProblemSettings lv{3, 50, (root / "data").string()};
  const Problem p = load_problem(ExperimentKind::lv, lv);
  CHECK(p.x_o.size() == 9);
  CHECK(p.prior.box() != nullptr);
  lv.pilot_simulations = 60;
  CHECK_THROWS_AS(load_problem(ExperimentKind::lv, lv), std::runtime_error);
}

TEST_CASE("abc runs, accounting and manifests") {
  const fs::path root = scratch("abc_runs");
  std::vector<RunResult> results;
  for (Method m : {Method::rejection, Method::mcmc, Method::smc}) {
    const auto cfg = small_mog(m, root);
    const RunResult r = run_experiment(cfg);
    INFO(to_string(m) << ": " << r.error);
    REQUIRE(r.ok());
    long total = 0;
    for (const auto& [phase, n] : r.phase_simulations) total += n;
    CHECK(total == r.n_simulations);
    CHECK(r.metrics.count("tv") == 1);
    CHECK(r.weights.sum() == doctest::Approx(1.0));
    write_run(r);
    const RunResult back = read_run(cfg.output_dir);
    CHECK(back.metrics == r.metrics);
    CHECK(back.samples == r.samples);
    CHECK(back.weights == r.weights);
    CHECK(run_manifest(back).dump() == run_manifest(r).dump());
    results.push_back(r);
  }
  const auto& rej = results[0];
  CHECK(simulation_cost(rej) == static_cast<double>(rej.n_simulations) / 200.0);
  const auto& smc = results[2];
  CHECK(smc.metrics.at("ess") <= 200.0);
  CHECK(simulation_cost(smc) >= static_cast<double>(smc.n_simulations) / 200.0);
}

TEST_CASE("rejection at huge tolerance returns the prior moments") {
  const fs::path root = scratch("accept_all");
  auto cfg = small_mog(Method::rejection, root);
  cfg.abc.epsilon = 1e9;
  cfg.abc.n_samples = 20000;
  cfg.abc.fit = "gaussian";
  const RunResult r = run_experiment(cfg);
  REQUIRE(r.posterior);
  CHECK(std::abs(r.posterior->mean()[0]) < 0.2);
  CHECK(r.posterior->covariance()(0, 0) == doctest::Approx(400.0 / 12.0).epsilon(0.03));
  CHECK(r.n_simulations == 20000);
}

TEST_CASE("mdn runs are reproducible and conserve simulations") {
  const fs::path root = scratch("mdn_runs");
  for (Method m : {Method::mdn_prior, Method::proposal_prior, Method::mdn_proposal}) {
    const auto cfg = small_mog(m, root);
    const RunResult a = run_experiment(cfg);
    const RunResult b = run_experiment(cfg);
    INFO(to_string(m) << ": " << a.error);
    REQUIRE(a.ok());
    nlohmann::json ja = run_manifest(a), jb = run_manifest(b);
    ja.erase("timings");
    jb.erase("timings");
    CHECK(ja.dump() == jb.dump());
    long total = 0;
    for (const auto& [phase, n] : a.phase_simulations) total += n;
    CHECK(total == a.n_simulations);
    if (m != Method::mdn_prior) CHECK(a.proposal_trace.size() == static_cast<std::size_t>(a.metrics.at("proposal_iterations")));
    CHECK(a.metrics.count("mass_outside_prior") == 1);
  }
}

TEST_CASE("plot tables") {
  const fs::path root = scratch("plots");
  auto mdn_cfg = small_mog(Method::mdn_prior, root);
  const RunResult mdn = run_experiment(mdn_cfg);
  REQUIRE(mdn.ok());
  std::ostringstream one;
  emit_plot_data(std::span(&mdn, 1), PlotKind::metric_vs_nsims, one);
  const auto rows = lines_of(one.str());
  REQUIRE(rows.size() == 2);
  const auto head = split(rows[0]);
  const auto row = split(rows[1]);
  CHECK(head[4] == "n_simulations");
  CHECK(head[5] == "cost");
  CHECK(row[4] == "500");
  CHECK(std::stod(row[5]) == 500.0);

  std::vector<RunResult> abc;
  for (double eps : {0.5, 1.0}) {
    auto c = small_mog(Method::rejection, root);
    c.abc.epsilon = eps;
    abc.push_back(run_experiment(c));
  }
  std::ostringstream by_eps;
  emit_plot_data(abc, PlotKind::metric_vs_eps, by_eps);
  const auto eps_rows = lines_of(by_eps.str());
  REQUIRE(eps_rows.size() == 3);
  CHECK(std::stod(split(eps_rows[1])[3]) == 1.0);
  CHECK(std::stod(split(eps_rows[1])[5]) == static_cast<double>(abc[1].n_simulations) / 200.0);

  std::ostringstream marginal;
  PlotOptions opt;
  opt.grid_points = 11;
  emit_plot_data(std::span(&mdn, 1), PlotKind::marginal, marginal, opt);
  const auto m_rows = lines_of(marginal.str());
  REQUIRE(m_rows.size() == 12);
  CHECK(split(m_rows[0])[1] == "true");
  CHECK(std::stod(split(m_rows[6])[0]) == 0.0);
  CHECK(std::stod(split(m_rows[6])[1]) == doctest::Approx(2.194).epsilon(1e-3));

  CHECK_THROWS_AS(emit_plot_data(std::span<const RunResult>(), PlotKind::marginal, marginal), std::invalid_argument);
  CHECK_THROWS_AS(emit_plot_data(std::span(&mdn, 1), PlotKind::metric_vs_eps, marginal), std::invalid_argument);
}
