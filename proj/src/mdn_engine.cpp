#include "mdn_engine.hpp"

#include "lfi/errors.hpp"

#include <cmath>

namespace lfi::detail {

namespace {

void linear_forward(const NetworkParams& net, Index block_index, const Matrix& input,
                    const BlockNoise* noise, ForwardCache& cache) {
  const LinearBlock& b = net.layout.blocks()[static_cast<std::size_t>(block_index)];
  Matrix& act = cache.activations[static_cast<std::size_t>(block_index)];
  act.noalias() = weights_of(net.mean, b) * input;
  act.colwise() += bias_of(net.mean, b);
  if (net.log_var == nullptr || noise == nullptr) return;

  Matrix& sd = cache.stddev[static_cast<std::size_t>(block_index)];
  sd.noalias() = weights_of(*net.log_var, b).array().exp().matrix() * input.cwiseAbs2();
  sd.colwise() += bias_of(*net.log_var, b).array().exp().matrix();
  sd = sd.cwiseSqrt();
  act.array() += sd.array() * (*noise)[static_cast<std::size_t>(block_index)].array();
}

// Accumulates parameter gradients of one block given dL/d(activation) and,
// when `input_grad` is set, adds dL/d(input).
void linear_backward(const NetworkParams& net, Index block_index, const Matrix& input,
                     const Matrix& act_grad, const BlockNoise* noise, const ForwardCache& cache,
                     BatchGradient& out, Matrix* input_grad) {
  const LinearBlock& b = net.layout.blocks()[static_cast<std::size_t>(block_index)];
  if (b.rows == 0) return;
  weights_of(out.grad_mean, b).noalias() += act_grad * input.transpose();
  bias_of(out.grad_mean, b) += act_grad.rowwise().sum();
  if (input_grad != nullptr) input_grad->noalias() += weights_of(net.mean, b).transpose() * act_grad;
  if (net.log_var == nullptr || noise == nullptr) return;

  // a = a_m + sd * u with sd^2 = v; dL/dv = dL/da * u / (2 sd).
  const Matrix& sd = cache.stddev[static_cast<std::size_t>(block_index)];
  const Matrix var_grad = (act_grad.array() * (*noise)[static_cast<std::size_t>(block_index)].array() /
                           (2.0 * sd.array()))
                              .matrix();
  const Matrix w_var = weights_of(*net.log_var, b).array().exp().matrix();
  weights_of(out.grad_log_var, b).array() +=
      (var_grad * input.cwiseAbs2().transpose()).array() * w_var.array();
  bias_of(out.grad_log_var, b).array() +=
      var_grad.rowwise().sum().array() * bias_of(*net.log_var, b).array().exp();
  if (input_grad != nullptr)
    input_grad->array() += 2.0 * input.array() * (w_var.transpose() * var_grad).array();
}

Scalar log_sum_exp(const Vector& v) {
  const Scalar top = v.maxCoeff();
  return top + std::log((v.array() - top).exp().sum());
}

struct HeadWorkspace {
  Matrix u;
  Vector delta, z, log_terms;
  std::vector<Vector> deltas, zs;
  std::vector<Matrix> us;
};

// log q(theta_j | x_j); writes dlogq/d(head activations) * scale when grads is set.
Scalar head_log_prob(const ParamLayout& layout, const ForwardCache& cache, const Matrix& thetas,
                     Index j, std::vector<Matrix>* grads, Scalar scale, HeadWorkspace& ws) {
  const Index d = layout.dims().theta_dim;
  const Index k_count = layout.dims().n_components;
  const auto& act = cache.activations;

  const auto logits = act[static_cast<std::size_t>(layout.alpha_index())].col(j);
  const Scalar logit_norm = log_sum_exp(logits);
  ws.log_terms.resize(k_count);
  ws.deltas.resize(static_cast<std::size_t>(k_count));
  ws.zs.resize(static_cast<std::size_t>(k_count));
  ws.us.resize(static_cast<std::size_t>(k_count));

  for (Index k = 0; k < k_count; ++k) {
    const auto mean = act[static_cast<std::size_t>(layout.mean_index(k))].col(j);
    const auto log_diag = act[static_cast<std::size_t>(layout.diag_index(k))].col(j);
    const auto utri = act[static_cast<std::size_t>(layout.utri_index(k))].col(j);
    Matrix& u = ws.us[static_cast<std::size_t>(k)];
    u.setZero(d, d);
    Index t = 0;
    for (Index r = 0; r < d; ++r) {
      u(r, r) = std::exp(log_diag[r]);
      for (Index c = r + 1; c < d; ++c) u(r, c) = utri[t++];
    }
    Vector& delta = ws.deltas[static_cast<std::size_t>(k)];
    Vector& z = ws.zs[static_cast<std::size_t>(k)];
    delta = thetas.col(j) - mean;
    z.noalias() = u.triangularView<Eigen::Upper>() * delta;
    ws.log_terms[k] = logits[k] - logit_norm - 0.5 * static_cast<Scalar>(d) * kLog2Pi +
                      log_diag.sum() - 0.5 * z.squaredNorm();
  }
  const Scalar total = log_sum_exp(ws.log_terms);
  if (grads == nullptr) return total;

  auto& g = *grads;
  const Vector resp = (ws.log_terms.array() - total).exp();
  const Vector alpha = (logits.array() - logit_norm).exp();
  g[static_cast<std::size_t>(layout.alpha_index())].col(j) = scale * (resp - alpha);
  for (Index k = 0; k < k_count; ++k) {
    const Scalar rk = scale * resp[k];
    const Matrix& u = ws.us[static_cast<std::size_t>(k)];
    const Vector& delta = ws.deltas[static_cast<std::size_t>(k)];
    const Vector& z = ws.zs[static_cast<std::size_t>(k)];
    g[static_cast<std::size_t>(layout.mean_index(k))].col(j).noalias() =
        u.transpose().triangularView<Eigen::Lower>() * z;
    g[static_cast<std::size_t>(layout.mean_index(k))].col(j) *= rk;
    auto gd = g[static_cast<std::size_t>(layout.diag_index(k))].col(j);
    auto gu = g[static_cast<std::size_t>(layout.utri_index(k))].col(j);
    Index t = 0;
    for (Index r = 0; r < d; ++r) {
      gd[r] = rk * (1.0 - z[r] * delta[r] * u(r, r));
      for (Index c = r + 1; c < d; ++c) gu[t++] = -rk * z[r] * delta[c];
    }
  }
  return total;
}

}  // namespace

BlockNoise draw_noise(const ParamLayout& layout, Index batch, Rng& rng) {
  BlockNoise noise;
  noise.reserve(layout.blocks().size());
  for (const auto& b : layout.blocks()) noise.push_back(standard_normal(b.rows, batch, rng));
  return noise;
}

void forward_pass(const NetworkParams& net, const Matrix& xs, const BlockNoise* noise,
                  ForwardCache& cache) {
  const ParamLayout& layout = net.layout;
  if (xs.rows() != layout.dims().x_dim) throw DimensionMismatch("MDN forward", layout.dims().x_dim, xs.rows());
  const std::size_t n_blocks = layout.blocks().size();
  cache.activations.resize(n_blocks);
  cache.stddev.resize(n_blocks);
  cache.layer_inputs.resize(static_cast<std::size_t>(layout.n_hidden()) + 1);
  cache.layer_inputs[0] = xs;
  for (Index l = 0; l < layout.n_hidden(); ++l) {
    linear_forward(net, layout.hidden_index(l), cache.layer_inputs[static_cast<std::size_t>(l)], noise, cache);
    cache.layer_inputs[static_cast<std::size_t>(l) + 1] =
        cache.activations[static_cast<std::size_t>(layout.hidden_index(l))].array().tanh();
  }
  const Matrix& y = cache.layer_inputs.back();
  for (Index i = layout.alpha_index(); i < static_cast<Index>(n_blocks); ++i)
    linear_forward(net, i, y, noise, cache);
}

GaussianMixture assemble_mixture(const ParamLayout& layout, const ForwardCache& cache, Index j) {
  const Index d = layout.dims().theta_dim;
  const Index k_count = layout.dims().n_components;
  const auto& act = cache.activations;
  const auto logits = act[static_cast<std::size_t>(layout.alpha_index())].col(j);
  Vector weights = (logits.array() - logits.maxCoeff()).exp();
  weights /= weights.sum();
  std::vector<Gaussian> comps;
  comps.reserve(static_cast<std::size_t>(k_count));
  for (Index k = 0; k < k_count; ++k) {
    const auto log_diag = act[static_cast<std::size_t>(layout.diag_index(k))].col(j);
    const auto utri = act[static_cast<std::size_t>(layout.utri_index(k))].col(j);
    Matrix u = Matrix::Zero(d, d);
    Index t = 0;
    for (Index r = 0; r < d; ++r) {
      u(r, r) = std::exp(log_diag[r]);
      for (Index c = r + 1; c < d; ++c) u(r, c) = utri[t++];
    }
    comps.emplace_back(Vector(act[static_cast<std::size_t>(layout.mean_index(k))].col(j)), std::move(u));
  }
  return GaussianMixture(std::move(weights), std::move(comps));
}

BatchGradient evaluate(const NetworkParams& net, const Matrix& thetas, const Matrix& xs,
                       const BlockNoise* noise, bool with_gradient) {
  const ParamLayout& layout = net.layout;
  if (thetas.rows() != layout.dims().theta_dim)
    throw DimensionMismatch("MDN evaluate", layout.dims().theta_dim, thetas.rows());
  if (thetas.cols() != xs.cols()) throw DimensionMismatch("MDN evaluate (batch)", thetas.cols(), xs.cols());
  const Index batch = xs.cols();

  ForwardCache cache;
  forward_pass(net, xs, noise, cache);

  BatchGradient out;
  out.per_sample.resize(batch);
  std::vector<Matrix> head_grads;
  const Scalar scale = 1.0 / static_cast<Scalar>(batch);
  if (with_gradient) {
    head_grads.resize(layout.blocks().size());
    for (Index i = layout.alpha_index(); i < static_cast<Index>(layout.blocks().size()); ++i)
      head_grads[static_cast<std::size_t>(i)].resize(layout.blocks()[static_cast<std::size_t>(i)].rows, batch);
  }
  HeadWorkspace ws;
  for (Index j = 0; j < batch; ++j)
    out.per_sample[j] = head_log_prob(layout, cache, thetas, j, with_gradient ? &head_grads : nullptr, scale, ws);
  out.mean_log_prob = out.per_sample.mean();
  if (!with_gradient) return out;

  out.grad_mean = Vector::Zero(layout.size());
  if (net.log_var != nullptr && noise != nullptr) out.grad_log_var = Vector::Zero(layout.size());
  const Matrix& y = cache.layer_inputs.back();
  Matrix upstream = Matrix::Zero(y.rows(), batch);
  const bool need_input_grad = layout.n_hidden() > 0;
  for (Index i = layout.alpha_index(); i < static_cast<Index>(layout.blocks().size()); ++i)
    linear_backward(net, i, y, head_grads[static_cast<std::size_t>(i)], noise, cache, out,
                    need_input_grad ? &upstream : nullptr);

  for (Index l = layout.n_hidden() - 1; l >= 0; --l) {
    const Matrix& output = cache.layer_inputs[static_cast<std::size_t>(l) + 1];
    const Matrix act_grad = (upstream.array() * (1.0 - output.array().square())).matrix();
    const Matrix& input = cache.layer_inputs[static_cast<std::size_t>(l)];
    Matrix below;
    if (l > 0) below = Matrix::Zero(input.rows(), batch);
    linear_backward(net, layout.hidden_index(l), input, act_grad, noise, cache, out, l > 0 ? &below : nullptr);
    upstream = std::move(below);
  }
  return out;
}

}  // namespace lfi::detail
