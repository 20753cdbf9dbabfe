#pragma once

#include "lfi/core.hpp"

namespace lfi {

/// Moment accumulators of the Adam optimizer (beta1 = 0.9, beta2 = 0.999, eps = 1e-8).
struct AdamState {
  AdamState() = default;
  explicit AdamState(Index n) : first_moment(Vector::Zero(n)), second_moment(Vector::Zero(n)) {}

  Vector first_moment;
  Vector second_moment;
  long step = 0;
};

inline constexpr Scalar kAdamBeta1 = 0.9;
inline constexpr Scalar kAdamBeta2 = 0.999;
inline constexpr Scalar kAdamEpsilon = 1e-8;
inline constexpr Scalar kAdamLearningRate = 1e-3;

/// One bias-corrected Adam update that descends `loss_gradient`.
void adam_step(AdamState& state, Vector& params, const Vector& loss_gradient,
               Scalar learning_rate = kAdamLearningRate);

}  // namespace lfi
