#include "lfi/adam.hpp"

#include "lfi/errors.hpp"

#include <cmath>

namespace lfi {

void adam_step(AdamState& state, Vector& params, const Vector& loss_gradient,
               Scalar learning_rate) {
  if (state.first_moment.size() != params.size()) {
    if (state.step != 0) throw DimensionMismatch("adam_step", state.first_moment.size(), params.size());
    state = AdamState(params.size());
  }
  if (loss_gradient.size() != params.size())
    throw DimensionMismatch("adam_step", params.size(), loss_gradient.size());

  ++state.step;
  state.first_moment = kAdamBeta1 * state.first_moment + (1.0 - kAdamBeta1) * loss_gradient;
  state.second_moment =
      kAdamBeta2 * state.second_moment + (1.0 - kAdamBeta2) * loss_gradient.cwiseAbs2();
  const Scalar c1 = 1.0 - std::pow(kAdamBeta1, static_cast<Scalar>(state.step));
  const Scalar c2 = 1.0 - std::pow(kAdamBeta2, static_cast<Scalar>(state.step));
  params.array() -= learning_rate * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + kAdamEpsilon);
}

}  // namespace lfi
