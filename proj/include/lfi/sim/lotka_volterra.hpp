#pragma once

// Stochastic predator (X) / prey (Y) model summarized by 9 statistics.

#include "lfi/sim/gillespie.hpp"
#include "lfi/simulator.hpp"

namespace lfi {

struct LvProblem {
  long predators = 50;
  long prey = 100;
  Scalar duration = 30.0;
  Scalar interval = 0.2;
  long max_events = 100000;
  Scalar log_theta_lower = -5.0;
  Scalar log_theta_upper = 2.0;
  Vector theta_true = Vector{{0.01, 0.5, 1.0, 0.01}};
};

inline constexpr Index kLvStats = 9;

/// Per-statistic pilot mean and standard deviation.
struct PilotNormalizer {
  Vector mean;
  Vector std;
};

/// Reactions: predator born (theta1 X Y), predator dies (theta2 X), prey born
/// (theta3 Y), prey eaten (theta4 X Y). Returns X in row 0 and Y in row 1.
SsaTrajectory gillespie_lv(const LvProblem& p, const Vector& theta, Rng& rng);

/// mean X, mean Y, log var X, log var Y, acf1 X, acf2 X, acf1 Y, acf2 Y, ccf XY.
/// Variances and autocovariances divide by the series length; a constant
/// series has log variance log(1e-12) and zero correlations.
Vector lv_summary(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

/// Elementwise (s - mean) / std. Throws PilotDegenerate for a zero std.
Vector pilot_normalize(const Vector& stats, const PilotNormalizer& pilot);

/// Raw (unnormalized) statistics of one simulation at theta.
Vector lv_raw_stats(const LvProblem& p, const Vector& theta, Rng& rng);

/// Mean and std over n pilot simulations with log theta drawn from the prior;
/// exploded draws are replaced.
PilotNormalizer lv_pilot(const LvProblem& p, Index n, Rng& rng);

/// Simulator over log theta returning normalized statistics.
Simulator lv_simulator(const LvProblem& p, const PilotNormalizer& pilot);

/// Uniform box over log theta.
Prior lv_prior(const LvProblem& p = {});

}  // namespace lfi
