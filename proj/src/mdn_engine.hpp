#pragma once

// Shared batched forward/backward pass for conventional and variational MDNs.
// With `log_var` set, every unit uses the local reparameterization
// a = a_m + sqrt(exp(w_s)^T (z*z) + exp(b_s)) * u with u taken from `noise`.

#include "lfi/mdn.hpp"

#include <vector>

namespace lfi::detail {

struct NetworkParams {
  const ParamLayout& layout;
  const Vector& mean;
  const Vector* log_var = nullptr;
};

/// One standard-normal matrix per block (rows x batch), in storage order.
using BlockNoise = std::vector<Matrix>;

BlockNoise draw_noise(const ParamLayout& layout, Index batch, Rng& rng);

struct ForwardCache {
  std::vector<Matrix> layer_inputs;  // input to hidden layer l; back() feeds the heads
  std::vector<Matrix> activations;   // per block, after noise
  std::vector<Matrix> stddev;        // per block, only with noise
};

void forward_pass(const NetworkParams& net, const Matrix& xs, const BlockNoise* noise,
                  ForwardCache& cache);

/// Mixture encoded by the head activations of batch column j.
GaussianMixture assemble_mixture(const ParamLayout& layout, const ForwardCache& cache, Index j);

struct BatchGradient {
  Scalar mean_log_prob = 0.0;
  Vector grad_mean;
  Vector grad_log_var;  // empty without log_var
  Vector per_sample;    // log q for every column
};

/// Mean log probability of the batch; gradients are filled when `with_gradient`.
BatchGradient evaluate(const NetworkParams& net, const Matrix& thetas, const Matrix& xs,
                       const BlockNoise* noise, bool with_gradient);

}  // namespace lfi::detail
