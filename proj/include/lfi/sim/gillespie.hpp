#pragma once

// Exact stochastic simulation of a Markov jump process on integer counts.

#include "lfi/core.hpp"

#include <functional>

namespace lfi {

using Counts = Eigen::Matrix<long, Eigen::Dynamic, 1>;

struct Reaction {
  std::function<Scalar(const Counts&)> rate;
  /// Added to the state when the reaction fires.
  Counts change;
};

struct SsaTrajectory {
  /// State recorded at every grid time, one column per time point.
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> records;
  long n_events = 0;
};

/// Simulates from time 0 to `duration` and records the state every `interval`
/// (including t = 0 and the end point). The value recorded at time t reflects
/// every event at or before t. When the total rate drops to zero the state is
/// frozen for the remaining records. Throws SimulationExploded once more than
/// max_events reactions have fired.
SsaTrajectory gillespie(const std::vector<Reaction>& reactions, Counts initial, Scalar duration,
                        Scalar interval, Rng& rng, long max_events = 100000);

}  // namespace lfi
