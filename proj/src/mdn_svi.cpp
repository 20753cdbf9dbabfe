#include "lfi/mdn_svi.hpp"

#include "lfi/errors.hpp"
#include "mdn_engine.hpp"
#include "net_io.hpp"
#include "training.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

namespace lfi {

SviNet::SviNet(MdnDims dims, Vector phi_mean, Vector phi_log_var, Scalar lambda)
    : layout_(std::move(dims)),
      phi_mean_(std::move(phi_mean)),
      phi_log_var_(std::move(phi_log_var)),
      lambda_(lambda) {
  if (phi_mean_.size() != layout_.size()) throw DimensionMismatch("SviNet means", layout_.size(), phi_mean_.size());
  if (phi_log_var_.size() != layout_.size())
    throw DimensionMismatch("SviNet log variances", layout_.size(), phi_log_var_.size());
  if (!(lambda_ > 0.0)) throw std::invalid_argument("SviNet: lambda must be positive");
}

SviNet svi_init(MdnDims dims, Scalar lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("svi_init: lambda must be positive");
  const ParamLayout layout(dims);
  return SviNet(std::move(dims), Vector::Zero(layout.size()),
                Vector::Constant(layout.size(), std::log(1.0 / lambda)), lambda);
}

SviNet svi_start(MdnDims dims, Rng& rng, Scalar lambda, Scalar log_var) {
  if (!(lambda > 0.0)) throw std::invalid_argument("svi_start: lambda must be positive");
  MdnNet means = MdnNet::initialized(dims, rng);
  const Index p = means.params().size();
  return SviNet(std::move(dims), std::move(means.params()), Vector::Constant(p, log_var), lambda);
}

std::vector<Matrix> draw_svi_noise(const ParamLayout& layout, Index batch, Rng& rng) {
  return detail::draw_noise(layout, batch, rng);
}

GaussianMixture forward_train(const SviNet& net, const Vector& x, Rng& rng) {
  const auto noise = detail::draw_noise(net.layout(), 1, rng);
  detail::ForwardCache cache;
  detail::forward_pass({net.layout(), net.phi_mean(), &net.phi_log_var()}, Matrix(x), &noise, cache);
  return detail::assemble_mixture(net.layout(), cache, 0);
}

GaussianMixture forward_predict(const SviNet& net, const Vector& x) {
  detail::ForwardCache cache;
  detail::forward_pass({net.layout(), net.phi_mean()}, Matrix(x), nullptr, cache);
  return detail::assemble_mixture(net.layout(), cache, 0);
}

Scalar svi_kl_term(const SviNet& net) {
  return 0.5 * net.lambda() * (net.phi_mean().squaredNorm() + net.phi_log_var().array().exp().sum()) -
         0.5 * net.phi_log_var().sum();
}

namespace {

SviObjective objective_from(const SviNet& net, const Vector& mean, const Vector& log_var,
                            const Matrix& thetas, const Matrix& xs, Index n_total,
                            const std::vector<Matrix>& noise) {
  if (thetas.cols() == 0) throw std::invalid_argument("svi_objective_grad: empty batch");
  if (n_total < thetas.cols()) throw std::invalid_argument("svi_objective_grad: n_total smaller than batch");
  auto r = detail::evaluate({net.layout(), mean, &log_var}, thetas, xs, &noise, true);
  const Scalar lambda = net.lambda();
  const Scalar n = static_cast<Scalar>(n_total);
  const Scalar kl = 0.5 * lambda * (mean.squaredNorm() + log_var.array().exp().sum()) - 0.5 * log_var.sum();
  SviObjective out;
  out.mean_log_prob = r.mean_log_prob;
  out.value = r.mean_log_prob - kl / n;
  out.grad_mean = r.grad_mean - (lambda / n) * mean;
  out.grad_log_var = r.grad_log_var - ((0.5 * lambda) * log_var.array().exp() - 0.5).matrix() / n;
  return out;
}

}  // namespace

SviObjective svi_objective_grad(const SviNet& net, const Matrix& thetas, const Matrix& xs,
                                Index n_total, const std::vector<Matrix>& noise) {
  return objective_from(net, net.phi_mean(), net.phi_log_var(), thetas, xs, n_total, noise);
}

SviObjective svi_objective_grad(const SviNet& net, const Matrix& thetas, const Matrix& xs,
                                Index n_total, Rng& rng) {
  return svi_objective_grad(net, thetas, xs, n_total, detail::draw_noise(net.layout(), xs.cols(), rng));
}

SviNet train_mdn_svi(SviNet net, const SimDataset& data, const TrainConfig& cfg, TrainLog* log) {
  if (data.theta_dim() != net.dims().theta_dim) throw DimensionMismatch("train_mdn_svi", net.dims().theta_dim, data.theta_dim());
  if (data.x_dim() != net.dims().x_dim) throw DimensionMismatch("train_mdn_svi", net.dims().x_dim, data.x_dim());
  const Index p = net.layout().size();
  const Index n_total = data.size();
  Vector packed(2 * p);
  packed << net.phi_mean(), net.phi_log_var();

  Vector trained = detail::run_minibatch_adam(
      std::move(packed), data, cfg, log,
      [&](const Vector& params, const Matrix& thetas, const Matrix& xs, Rng& rng) {
        const Vector mean = params.head(p);
        const Vector log_var = params.tail(p);
        const auto noise = detail::draw_noise(net.layout(), xs.cols(), rng);
        auto o = objective_from(net, mean, log_var, thetas, xs, n_total, noise);
        Vector grad(2 * p);
        grad << o.grad_mean, o.grad_log_var;
        return ValueAndGradient{o.value, std::move(grad)};
      },
      [&](const Vector& params, const Matrix& thetas, const Matrix& xs) {
        const Vector mean = params.head(p);
        return detail::evaluate({net.layout(), mean}, thetas, xs, nullptr, false).mean_log_prob;
      });
  net.phi_mean() = trained.head(p);
  net.phi_log_var() = trained.tail(p);
  return net;
}

SviNet replicate_components(const SviNet& net, Index n_components, Rng& rng, Scalar noise_scale) {
  if (n_components < 1) throw std::invalid_argument("replicate_components: need at least one component");
  MdnDims dims = net.dims();
  dims.n_components = n_components;
  const ParamLayout to(dims);
  Vector mean = replicate_parameters(net.layout(), to, net.phi_mean(), rng, noise_scale, true);
  Vector log_var = replicate_parameters(net.layout(), to, net.phi_log_var(), rng, 0.0, false);
  return SviNet(dims, std::move(mean), std::move(log_var), net.lambda());
}

void save(const SviNet& net, std::ostream& out) {
  detail::write_dims_line("mdn_svi", net.dims(), out);
  out << ' ' << std::setprecision(std::numeric_limits<Scalar>::max_digits10) << net.lambda() << '\n';
  detail::write_vector(net.phi_mean(), out);
  detail::write_vector(net.phi_log_var(), out);
}

SviNet load_svi(std::istream& in) {
  std::string tag;
  if (!(in >> tag) || tag != "mdn_svi") throw Error("parameter file: expected 'mdn_svi' header");
  MdnDims dims = detail::read_dims(in);
  Scalar lambda = 0.0;
  if (!(in >> lambda)) throw Error("parameter file: missing lambda");
  const ParamLayout layout(dims);
  Vector mean = detail::read_vector(layout.size(), in);
  Vector log_var = detail::read_vector(layout.size(), in);
  return SviNet(std::move(dims), std::move(mean), std::move(log_var), lambda);
}

}  // namespace lfi
