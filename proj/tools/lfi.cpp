// Command-line front end: run and sweep experiments, generate pilot data,
// emit plot tables and run the oracle self-test.

#include "lfi/bench/experiment.hpp"
#include "lfi/bench/plot.hpp"
#include "lfi/bench/problem.hpp"
#include "lfi/bench/selftest.hpp"

#include "CLI11.hpp"

#include <glob.h>

#include <filesystem>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace lfi;

namespace {

void print_summary(const RunResult& r, const fs::path& manifest) {
  std::cout << to_string(r.config.experiment) << ' ' << to_string(r.config.method) << " seed=" << r.config.seed
            << " simulations=" << r.n_simulations;
  for (const auto& [name, value] : r.metrics) std::cout << ' ' << name << '=' << value;
  std::cout << "\n  -> " << manifest.string() << '\n';
  if (!r.fit_error.empty()) std::cout << "  fit: " << r.fit_error << '\n';
  if (!r.error.empty()) std::cerr << "  error: " << r.error << '\n';
}

ExperimentConfig configured(const std::string& path, const std::optional<std::uint64_t>& seed,
                            const std::string& out) {
  ExperimentConfig cfg = load_config(path);
  if (seed) cfg.seed = *seed;
  if (!out.empty()) cfg.output_dir = out;
  return cfg;
}

// Expands shell-style patterns; a directory without a manifest contributes
// every run below it.
std::vector<fs::path> run_dirs(const std::vector<std::string>& patterns) {
  std::vector<fs::path> found;
  auto add = [&](const fs::path& p) {
    if (fs::is_regular_file(p) && p.filename() == "manifest.json") {
      found.push_back(p.parent_path());
    } else if (fs::is_directory(p)) {
      if (fs::exists(p / "manifest.json")) {
        found.push_back(p);
      } else {
        std::vector<fs::path> below;
        for (const auto& e : fs::recursive_directory_iterator(p))
          if (e.path().filename() == "manifest.json") below.push_back(e.path().parent_path());
        std::sort(below.begin(), below.end());
        found.insert(found.end(), below.begin(), below.end());
      }
    }
  };
  for (const auto& pattern : patterns) {
    glob_t g{};
    if (glob(pattern.c_str(), 0, nullptr, &g) == 0)
      for (std::size_t i = 0; i < g.gl_pathc; ++i) add(g.gl_pathv[i]);
    globfree(&g);
  }
  return found;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Likelihood-free inference with mixture density networks and ABC baselines"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run one configured experiment and persist its manifest");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the run seed");
  run->add_option("--out", out_dir, "Override the output directory");

  auto* sweep = app.add_subcommand("sweep", "Run every value of the config's sweep list");
  sweep->add_option("--config", config_path, "Experiment config (JSON) with a sweep section")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--seed", seed, "Override the run seed");
  sweep->add_option("--out", out_dir, "Override the output directory");

  std::string experiment;
  std::uint64_t pilot_seed = 1;
  std::optional<Index> pilot_sims;
  std::string data_dir = "data";
  auto* pilot = app.add_subcommand("pilot", "Generate and persist pilot statistics and the observation");
  pilot->add_option("--experiment", experiment, "mog, blr, lv or mg1")->required();
  pilot->add_option("--seed", pilot_seed, "Problem seed");
  pilot->add_option("--simulations", pilot_sims, "Pilot simulations (default per experiment)");
  pilot->add_option("--data-dir", data_dir, "Root of the data directory");

  std::string kind;
  std::vector<std::string> runs;
  std::string plot_out;
  PlotOptions plot_opts;
  auto* plot = app.add_subcommand("plot", "Emit a comma-separated plot table from run manifests");
  plot->add_option("--kind", kind, "metric_vs_eps, metric_vs_nsims or marginal")->required();
  plot->add_option("--runs", runs, "Run directories or glob patterns")->required();
  plot->add_option("--out", plot_out, "Output file (default stdout)");
  plot->add_option("--parameter", plot_opts.parameter, "Parameter index for the marginal table");
  plot->add_option("--points", plot_opts.grid_points, "Grid points for the marginal table");

  std::uint64_t test_seed = 1;
  auto* selftest = app.add_subcommand("selftest", "Gradient, division and effective sample size oracles");
  selftest->add_option("--seed", test_seed, "Seed of the random cases");

  auto* validate = app.add_subcommand("validate", "Check a config and print it with all defaults filled in");
  validate->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ExperimentConfig cfg = configured(config_path, seed, out_dir);
      const RunResult r = run_experiment(cfg);
      const fs::path manifest = write_run(r, cfg.output_dir);
      print_summary(r, manifest);
      return r.ok() ? 0 : 1;
    }
    if (*sweep) {
      const ExperimentConfig cfg = configured(config_path, seed, out_dir);
      if (cfg.sweep.parameter.empty()) throw std::invalid_argument("config has no sweep section");
      const Problem problem = load_problem(cfg.experiment, cfg.problem);
      int failures = 0;
      for (const auto& c : expand_sweep(cfg)) {
        const RunResult r = run_experiment(c, problem);
        print_summary(r, write_run(r, c.output_dir));
        if (!r.ok()) ++failures;
      }
      return failures == 0 ? 0 : 1;
    }
    if (*pilot) {
      const ExperimentKind k = parse_experiment(experiment);
      ProblemSettings s = default_config(k, Method::mdn_prior).problem;
      s.seed = pilot_seed;
      s.data_dir = data_dir;
      if (pilot_sims) s.pilot_simulations = *pilot_sims;
      const fs::path dir = generate_problem_data(k, s);
      const Problem p = load_problem(k, s);
      std::cout << "wrote " << dir.string() << "\n  x_o = " << p.x_o.transpose() << '\n';
      return 0;
    }
    if (*plot) {
      const PlotKind pk = parse_plot_kind(kind);
      std::vector<RunResult> loaded;
      for (const auto& d : run_dirs(runs)) loaded.push_back(read_run(d));
      if (plot_out.empty())
        emit_plot_data(loaded, pk, std::cout, plot_opts);
      else
        emit_plot_data(loaded, pk, fs::path(plot_out), plot_opts);
      return 0;
    }
    if (*selftest) {
      bool all = true;
      for (const auto& c : run_selftest(test_seed)) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": worst " << c.worst << " (tolerance "
                  << c.tolerance << "); " << c.detail << '\n';
        all = all && c.passed;
      }
      return all ? 0 : 1;
    }
    if (*validate) {
      std::cout << to_json(load_config(config_path)).dump(2) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "lfi: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
