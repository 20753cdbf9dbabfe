#pragma once

#include "lfi/bench/config.hpp"
#include "lfi/bench/problem.hpp"
#include "lfi/mixture.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lfi {

struct RunResult {
  ExperimentConfig config;
  /// Learned posterior, or the parametric fit of the ABC samples.
  std::optional<GaussianMixture> posterior;
  /// Proposal after every iteration of the fixed point.
  std::vector<Gaussian> proposal_trace;
  /// ABC samples, one per column, with their weights.
  Matrix samples;
  Vector weights;
  /// ABC tolerance schedule (SMC rounds, or the single epsilon).
  std::vector<Scalar> round_epsilons;
  std::vector<long> round_simulations;
  /// Simulator calls per phase; they sum to n_simulations.
  std::map<std::string, long> phase_simulations;
  long n_simulations = 0;
  std::map<std::string, Scalar> metrics;
  /// Seconds per phase. The only part of a run that is not reproducible.
  std::map<std::string, Scalar> timings;
  /// Set when the run stopped on an error; metrics are then partial.
  std::string error;
  /// Set when the ABC samples could not be fitted.
  std::string fit_error;

  bool ok() const { return error.empty(); }
};

/// Runs one configured method on one problem. Library errors are caught and
/// stored in `error`; invalid configurations throw.
RunResult run_experiment(const ExperimentConfig& cfg, const Problem& problem);
RunResult run_experiment(const ExperimentConfig& cfg);

/// Total simulations for MDN methods; simulations per effective sample for ABC.
Scalar simulation_cost(const RunResult& r);

nlohmann::json run_manifest(const RunResult& r);

/// Writes manifest.json (and samples.txt for ABC) into cfg.output_dir.
void write_run(const RunResult& r);
std::filesystem::path write_run(const RunResult& r, const std::filesystem::path& dir);
RunResult read_run(const std::filesystem::path& dir);

/// One config per sweep value, each writing to <output_dir>/<parameter>_<value>.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg);

}  // namespace lfi
