#pragma once

#include "lfi/adam.hpp"
#include "lfi/core.hpp"
#include "lfi/dataset.hpp"
#include "lfi/mixture.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lfi {

/// Architecture of a mixture density network.
struct MdnDims {
  Index x_dim = 1;
  Index theta_dim = 1;
  Index n_components = 1;
  std::vector<Index> hidden;

  Index n_utri() const { return theta_dim * (theta_dim - 1) / 2; }
  friend bool operator==(const MdnDims&, const MdnDims&) = default;
};

/// A dense layer inside the flat parameter vector: a rows x cols weight matrix
/// (column-major) followed by a bias of length rows.
struct LinearBlock {
  Index weight_offset = 0;
  Index bias_offset = 0;
  Index rows = 0;
  Index cols = 0;
};

/// Offsets of every weight and bias in the flat parameter vector. Storage order:
/// hidden layers, the mixing-coefficient head, then per component the mean,
/// diag(U) and strict-upper(U) heads. Strict-upper entries are row-major
/// (U01, U02, ..., U12, ...).
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(MdnDims dims);

  const MdnDims& dims() const { return dims_; }
  Index size() const { return size_; }
  Index n_hidden() const { return static_cast<Index>(dims_.hidden.size()); }

  /// All blocks in storage order.
  const std::vector<LinearBlock>& blocks() const { return blocks_; }
  Index hidden_index(Index layer) const { return layer; }
  Index alpha_index() const { return n_hidden(); }
  Index mean_index(Index k) const { return n_hidden() + 1 + 3 * k; }
  Index diag_index(Index k) const { return n_hidden() + 2 + 3 * k; }
  Index utri_index(Index k) const { return n_hidden() + 3 + 3 * k; }

  friend bool operator==(const ParamLayout& a, const ParamLayout& b) { return a.dims_ == b.dims_; }

 private:
  MdnDims dims_;
  std::vector<LinearBlock> blocks_;
  Index size_ = 0;
};

using WeightMap = Eigen::Map<Matrix>;
using ConstWeightMap = Eigen::Map<const Matrix>;

inline ConstWeightMap weights_of(const Vector& params, const LinearBlock& b) {
  return ConstWeightMap(params.data() + b.weight_offset, b.rows, b.cols);
}
inline WeightMap weights_of(Vector& params, const LinearBlock& b) {
  return WeightMap(params.data() + b.weight_offset, b.rows, b.cols);
}
inline auto bias_of(const Vector& params, const LinearBlock& b) {
  return params.segment(b.bias_offset, b.rows);
}
inline auto bias_of(Vector& params, const LinearBlock& b) { return params.segment(b.bias_offset, b.rows); }

/// Conventional mixture density network with tanh hidden layers.
class MdnNet {
 public:
  MdnNet() = default;
  /// All parameters zero.
  explicit MdnNet(MdnDims dims);
  MdnNet(MdnDims dims, Vector params);

  /// Weights iid N(0, 1/fan_in), biases zero (so every initial U_k is the identity).
  static MdnNet initialized(MdnDims dims, Rng& rng);

  const MdnDims& dims() const { return layout_.dims(); }
  const ParamLayout& layout() const { return layout_; }
  const Vector& params() const { return params_; }
  Vector& params() { return params_; }

 private:
  ParamLayout layout_;
  Vector params_;
};

/// Conditional mixture q(theta | x).
GaussianMixture forward(const MdnNet& net, const Vector& x);

/// log q(theta | x), using sum(diag activations) for -1/2 log det S_k.
Scalar log_prob(const MdnNet& net, const Vector& theta, const Vector& x);

struct ValueAndGradient {
  Scalar value = 0.0;
  Vector gradient;
};

/// Mean log probability over the batch columns and its gradient with respect
/// to every parameter (reverse mode).
ValueAndGradient mean_log_prob_gradient(const MdnNet& net, const Matrix& thetas, const Matrix& xs);

/// Mean log probability over the dataset.
Scalar mean_log_prob(const MdnNet& net, const Matrix& thetas, const Matrix& xs);

struct TrainConfig {
  Scalar learning_rate = kAdamLearningRate;
  Index minibatch_size = 100;
  Index n_epochs = 1000;
  std::uint64_t rng_seed = 0;
  /// Fraction of the shuffled data left out of training; 0 uses everything.
  Scalar holdout_fraction = 0.0;

  void validate() const;
};

/// Mean objective per epoch, filled in when passed to a trainer.
struct TrainLog {
  std::vector<Scalar> epoch_objective;
  Scalar holdout_log_prob = 0.0;
};

/// Minibatch Adam maximum-likelihood training. Deterministic for a fixed seed.
/// Throws TrainingDiverged on a non-finite loss.
MdnNet train_mdn(MdnNet net, const SimDataset& data, const TrainConfig& cfg, TrainLog* log = nullptr);

/// Turns a single-component net into `n_components` copies of its component
/// heads, each perturbed by N(0, noise_scale^2); the mixing head becomes
/// zeros plus noise. Hidden layers are copied unchanged.
MdnNet replicate_components(const MdnNet& net, Index n_components, Rng& rng, Scalar noise_scale = 1e-3);

/// Same operation on a raw parameter vector; `perturb` false copies without
/// noise and gives every mixing row the original row's values.
Vector replicate_parameters(const ParamLayout& from, const ParamLayout& to, const Vector& params,
                            Rng& rng, Scalar noise_scale, bool perturb);

void save(const MdnNet& net, std::ostream& out);
MdnNet load_mdn(std::istream& in);

}  // namespace lfi
