#include "lfi/mdn.hpp"

#include "lfi/errors.hpp"
#include "mdn_engine.hpp"
#include "net_io.hpp"
#include "training.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace lfi {

ParamLayout::ParamLayout(MdnDims dims) : dims_(std::move(dims)) {
  if (dims_.x_dim < 1 || dims_.theta_dim < 1 || dims_.n_components < 1)
    throw std::invalid_argument("MdnDims: dimensions and component count must be positive");
  for (Index h : dims_.hidden)
    if (h < 1) throw std::invalid_argument("MdnDims: hidden layer sizes must be positive");

  auto add = [this](Index rows, Index cols) {
    LinearBlock b{size_, size_ + rows * cols, rows, cols};
    size_ += rows * cols + rows;
    blocks_.push_back(b);
  };
  Index fan_in = dims_.x_dim;
  for (Index h : dims_.hidden) {
    add(h, fan_in);
    fan_in = h;
  }
  add(dims_.n_components, fan_in);
  for (Index k = 0; k < dims_.n_components; ++k) {
    add(dims_.theta_dim, fan_in);
    add(dims_.theta_dim, fan_in);
    add(dims_.n_utri(), fan_in);
  }
}

MdnNet::MdnNet(MdnDims dims) : layout_(std::move(dims)), params_(Vector::Zero(layout_.size())) {}

MdnNet::MdnNet(MdnDims dims, Vector params) : layout_(std::move(dims)), params_(std::move(params)) {
  if (params_.size() != layout_.size()) throw DimensionMismatch("MdnNet", layout_.size(), params_.size());
}

MdnNet MdnNet::initialized(MdnDims dims, Rng& rng) {
  MdnNet net(std::move(dims));
  for (const auto& b : net.layout().blocks()) {
    if (b.rows == 0) continue;
    weights_of(net.params(), b) = standard_normal(b.rows, b.cols, rng) / std::sqrt(static_cast<Scalar>(b.cols));
  }
  return net;
}

GaussianMixture forward(const MdnNet& net, const Vector& x) {
  detail::ForwardCache cache;
  detail::forward_pass({net.layout(), net.params()}, Matrix(x), nullptr, cache);
  return detail::assemble_mixture(net.layout(), cache, 0);
}

Scalar log_prob(const MdnNet& net, const Vector& theta, const Vector& x) {
  return detail::evaluate({net.layout(), net.params()}, Matrix(theta), Matrix(x), nullptr, false).mean_log_prob;
}

ValueAndGradient mean_log_prob_gradient(const MdnNet& net, const Matrix& thetas, const Matrix& xs) {
  if (thetas.cols() == 0) throw std::invalid_argument("mean_log_prob_gradient: empty batch");
  auto r = detail::evaluate({net.layout(), net.params()}, thetas, xs, nullptr, true);
  return {r.mean_log_prob, std::move(r.grad_mean)};
}

Scalar mean_log_prob(const MdnNet& net, const Matrix& thetas, const Matrix& xs) {
  return detail::evaluate({net.layout(), net.params()}, thetas, xs, nullptr, false).mean_log_prob;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be positive");
  if (minibatch_size < 1) throw std::invalid_argument("TrainConfig: minibatch_size must be at least 1");
  if (n_epochs < 0) throw std::invalid_argument("TrainConfig: n_epochs must be nonnegative");
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
    throw std::invalid_argument("TrainConfig: holdout_fraction must lie in [0, 1)");
}

MdnNet train_mdn(MdnNet net, const SimDataset& data, const TrainConfig& cfg, TrainLog* log) {
  if (data.theta_dim() != net.dims().theta_dim) throw DimensionMismatch("train_mdn", net.dims().theta_dim, data.theta_dim());
  if (data.x_dim() != net.dims().x_dim) throw DimensionMismatch("train_mdn", net.dims().x_dim, data.x_dim());
  const ParamLayout& layout = net.layout();
  Vector trained = detail::run_minibatch_adam(
      net.params(), data, cfg, log,
      [&](const Vector& params, const Matrix& thetas, const Matrix& xs, Rng&) {
        auto r = detail::evaluate({layout, params}, thetas, xs, nullptr, true);
        return ValueAndGradient{r.mean_log_prob, std::move(r.grad_mean)};
      },
      [&](const Vector& params, const Matrix& thetas, const Matrix& xs) {
        return detail::evaluate({layout, params}, thetas, xs, nullptr, false).mean_log_prob;
      });
  net.params() = std::move(trained);
  return net;
}

Vector replicate_parameters(const ParamLayout& from, const ParamLayout& to, const Vector& params,
                            Rng& rng, Scalar noise_scale, bool perturb) {
  if (from.dims().n_components != 1)
    throw std::invalid_argument("replicate_components: source net must have exactly one component");
  if (params.size() != from.size()) throw DimensionMismatch("replicate_components", from.size(), params.size());
  const Index k_new = to.dims().n_components;
  Vector out(to.size());
  auto copy_block = [&](const LinearBlock& src, const LinearBlock& dst, bool add_noise) {
    weights_of(out, dst) = weights_of(params, src);
    bias_of(out, dst) = bias_of(params, src);
    if (add_noise && noise_scale > 0.0) {
      weights_of(out, dst) += noise_scale * standard_normal(dst.rows, dst.cols, rng);
      bias_of(out, dst) += noise_scale * standard_normal(dst.rows, rng);
    }
  };
  const auto& fb = from.blocks();
  const auto& tb = to.blocks();
  for (Index l = 0; l < from.n_hidden(); ++l)
    copy_block(fb[static_cast<std::size_t>(l)], tb[static_cast<std::size_t>(l)], false);

  const LinearBlock& src_alpha = fb[static_cast<std::size_t>(from.alpha_index())];
  const LinearBlock& dst_alpha = tb[static_cast<std::size_t>(to.alpha_index())];
  if (perturb) {
    weights_of(out, dst_alpha) = noise_scale * standard_normal(dst_alpha.rows, dst_alpha.cols, rng);
    bias_of(out, dst_alpha) = noise_scale * standard_normal(dst_alpha.rows, rng);
  } else {
    weights_of(out, dst_alpha) = weights_of(params, src_alpha).replicate(k_new, 1);
    bias_of(out, dst_alpha).setConstant(params[src_alpha.bias_offset]);
  }
  for (Index k = 0; k < k_new; ++k) {
    copy_block(fb[static_cast<std::size_t>(from.mean_index(0))], tb[static_cast<std::size_t>(to.mean_index(k))], perturb);
    copy_block(fb[static_cast<std::size_t>(from.diag_index(0))], tb[static_cast<std::size_t>(to.diag_index(k))], perturb);
    copy_block(fb[static_cast<std::size_t>(from.utri_index(0))], tb[static_cast<std::size_t>(to.utri_index(k))], perturb);
  }
  return out;
}

MdnNet replicate_components(const MdnNet& net, Index n_components, Rng& rng, Scalar noise_scale) {
  if (n_components < 1) throw std::invalid_argument("replicate_components: need at least one component");
  MdnDims dims = net.dims();
  dims.n_components = n_components;
  const ParamLayout to(dims);
  return MdnNet(dims, replicate_parameters(net.layout(), to, net.params(), rng, noise_scale, true));
}

namespace {

void write_dims(const MdnDims& d, std::ostream& out) {
  out << d.x_dim << ' ' << d.theta_dim << ' ' << d.n_components << ' ' << d.hidden.size();
  for (Index h : d.hidden) out << ' ' << h;
}

}  // namespace

namespace detail {

MdnDims read_dims(std::istream& in) {
  MdnDims d;
  std::size_t n_hidden = 0;
  if (!(in >> d.x_dim >> d.theta_dim >> d.n_components >> n_hidden)) throw Error("parameter file: bad header");
  d.hidden.resize(n_hidden);
  for (auto& h : d.hidden)
    if (!(in >> h)) throw Error("parameter file: bad header");
  return d;
}

void write_vector(const Vector& v, std::ostream& out) {
  out << std::setprecision(std::numeric_limits<Scalar>::max_digits10);
  for (Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
}

Vector read_vector(Index n, std::istream& in) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    std::string token;
    if (!(in >> token)) throw Error("parameter file: truncated parameter block");
    v[i] = std::stod(token);
  }
  return v;
}

void write_dims_line(const char* tag, const MdnDims& d, std::ostream& out) {
  out << tag << ' ';
  write_dims(d, out);
}

}  // namespace detail

void save(const MdnNet& net, std::ostream& out) {
  detail::write_dims_line("mdn", net.dims(), out);
  out << '\n';
  detail::write_vector(net.params(), out);
}

MdnNet load_mdn(std::istream& in) {
  std::string tag;
  if (!(in >> tag) || tag != "mdn") throw Error("parameter file: expected 'mdn' header");
  MdnDims dims = detail::read_dims(in);
  const ParamLayout layout(dims);
  return MdnNet(dims, detail::read_vector(layout.size(), in));
}

}  // namespace lfi
