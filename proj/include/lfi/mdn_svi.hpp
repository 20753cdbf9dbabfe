#pragma once

#include "lfi/mdn.hpp"

namespace lfi {

/// Bayesian MDN: a factorized Gaussian over every network parameter with
/// means `phi_mean` and log variances `phi_log_var`, under an N(0, 1/lambda) prior.
class SviNet {
 public:
  SviNet() = default;
  SviNet(MdnDims dims, Vector phi_mean, Vector phi_log_var, Scalar lambda);

  const MdnDims& dims() const { return layout_.dims(); }
  const ParamLayout& layout() const { return layout_; }
  const Vector& phi_mean() const { return phi_mean_; }
  const Vector& phi_log_var() const { return phi_log_var_; }
  Vector& phi_mean() { return phi_mean_; }
  Vector& phi_log_var() { return phi_log_var_; }
  Scalar lambda() const { return lambda_; }

  /// Deterministic network carrying the means.
  MdnNet mean_net() const { return MdnNet(dims(), phi_mean_); }

 private:
  ParamLayout layout_;
  Vector phi_mean_;
  Vector phi_log_var_;
  Scalar lambda_ = 0.01;
};

inline constexpr Scalar kDefaultSviLambda = 0.01;

/// Means zero, log variances log(1/lambda). Throws for lambda <= 0.
SviNet svi_init(MdnDims dims, Scalar lambda = kDefaultSviLambda);

/// Log variance used when training starts from a random mean network.
inline constexpr Scalar kSviStartLogVar = -5.0;

/// Starting point for optimization: means from MdnNet::initialized and every
/// log variance at `log_var`. Starting at the prior itself (svi_init) gives
/// activations with variance ~100 * fan_in and Adam stalls on the resulting
/// heavy-tailed gradients.
SviNet svi_start(MdnDims dims, Rng& rng, Scalar lambda = kDefaultSviLambda,
                 Scalar log_var = kSviStartLogVar);

/// Noisy forward pass with one local-reparameterization draw per unit.
GaussianMixture forward_train(const SviNet& net, const Vector& x, Rng& rng);

/// Prediction mode: the conventional forward pass with the means.
GaussianMixture forward_predict(const SviNet& net, const Vector& x);

/// lambda/2 (|phi_m|^2 + sum exp(phi_s)) - 1/2 sum(phi_s).
Scalar svi_kl_term(const SviNet& net);

struct SviObjective {
  Scalar value = 0.0;           // mean log prob - KL / n_total
  Scalar mean_log_prob = 0.0;
  Vector grad_mean;
  Vector grad_log_var;
};

/// Stochastic lower bound and its gradient using the given per-unit noise
/// draws (see draw_svi_noise). Fixing the noise makes the objective a
/// deterministic function of the parameters.
SviObjective svi_objective_grad(const SviNet& net, const Matrix& thetas, const Matrix& xs,
                                Index n_total, const std::vector<Matrix>& noise);

/// Same, drawing fresh noise for every example and unit.
SviObjective svi_objective_grad(const SviNet& net, const Matrix& thetas, const Matrix& xs,
                                Index n_total, Rng& rng);

/// One standard-normal matrix per linear block (block rows x batch).
std::vector<Matrix> draw_svi_noise(const ParamLayout& layout, Index batch, Rng& rng);

/// Adam on the negated lower bound over all pairs, with N = data.size() in the
/// KL weight. Deterministic for a fixed seed.
SviNet train_mdn_svi(SviNet net, const SimDataset& data, const TrainConfig& cfg, TrainLog* log = nullptr);

/// Replicates the mean heads with noise (as for MdnNet) and copies the log variances.
SviNet replicate_components(const SviNet& net, Index n_components, Rng& rng, Scalar noise_scale = 1e-3);

void save(const SviNet& net, std::ostream& out);
SviNet load_svi(std::istream& in);

}  // namespace lfi
