#pragma once

// A benchmark problem ready for inference: simulator, prior, observation and
// whatever ground truth exists. Pilot statistics, regression inputs and the
// observation are persisted under <data_dir>/<experiment>_seed<N>/ and reused.

#include "lfi/bench/config.hpp"
#include "lfi/simulator.hpp"

#include <filesystem>
#include <functional>
#include <optional>

namespace lfi {

struct Problem {
  ExperimentKind kind = ExperimentKind::mog;
  Simulator simulator;
  Prior prior = Prior(Gaussian::standard(1));
  Vector x_o;
  /// True parameters in inference coordinates (log theta for lv,
  /// (theta1, theta2 - theta1, theta3) for mg1).
  std::optional<Vector> theta_true;
  /// Analytic posterior (blr).
  std::optional<Gaussian> true_posterior;
  /// Analytic 1-D posterior density (mog).
  std::function<Scalar(Scalar)> true_density;
  std::filesystem::path data_dir;
};

std::filesystem::path problem_dir(ExperimentKind kind, const ProblemSettings& settings);

/// Writes the artifacts of a problem, overwriting any existing ones.
std::filesystem::path generate_problem_data(ExperimentKind kind, const ProblemSettings& settings);

/// Loads the persisted artifacts, generating them first when missing.
Problem load_problem(ExperimentKind kind, const ProblemSettings& settings);

}  // namespace lfi
