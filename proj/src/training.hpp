#pragma once

// Minibatch Adam loop shared by the conventional and variational trainers.

#include "lfi/adam.hpp"
#include "lfi/errors.hpp"
#include "lfi/mdn.hpp"

#include <algorithm>
#include <numeric>

namespace lfi::detail {

inline Matrix gather_columns(const Matrix& m, const std::vector<Index>& idx, std::size_t begin, std::size_t end) {
  Matrix out(m.rows(), static_cast<Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i) out.col(static_cast<Index>(i - begin)) = m.col(idx[i]);
  return out;
}

/// `objective(params, thetas, xs, rng)` returns the value to maximize and its
/// gradient; `holdout(params, thetas, xs)` scores held-out pairs.
template <class Objective, class Holdout>
Vector run_minibatch_adam(Vector params, const SimDataset& data, const TrainConfig& cfg,
                          TrainLog* log, Objective&& objective, Holdout&& holdout) {
  cfg.validate();
  if (data.size() == 0) throw std::invalid_argument("training needs a nonempty dataset");
  Rng rng(cfg.rng_seed);

  std::vector<Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<Index> held;
  if (cfg.holdout_fraction > 0.0) {
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_held = static_cast<std::size_t>(cfg.holdout_fraction * static_cast<Scalar>(order.size()));
    held.assign(order.end() - static_cast<std::ptrdiff_t>(n_held), order.end());
    order.resize(order.size() - n_held);
    if (order.empty()) throw std::invalid_argument("holdout_fraction leaves no training data");
  }

  AdamState adam(params.size());
  const auto batch = static_cast<std::size_t>(cfg.minibatch_size);
  for (Index epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    Scalar epoch_total = 0.0;
    Index n_batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(order.size(), begin + batch);
      const Matrix thetas = gather_columns(data.thetas, order, begin, end);
      const Matrix xs = gather_columns(data.xs, order, begin, end);
      ValueAndGradient vg = objective(params, thetas, xs, rng);
      if (!std::isfinite(vg.value) || !vg.gradient.allFinite()) throw TrainingDiverged(static_cast<long>(epoch));
      adam_step(adam, params, -vg.gradient, cfg.learning_rate);
      epoch_total += vg.value;
      ++n_batches;
    }
    if (log != nullptr) log->epoch_objective.push_back(epoch_total / static_cast<Scalar>(n_batches));
  }
  if (log != nullptr && !held.empty()) {
    log->holdout_log_prob = holdout(params, gather_columns(data.thetas, held, 0, held.size()),
                                    gather_columns(data.xs, held, 0, held.size()));
  }
  return params;
}

}  // namespace lfi::detail
