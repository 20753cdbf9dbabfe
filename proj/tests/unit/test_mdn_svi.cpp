#include "doctest.h"
#include "linear_gaussian.hpp"

#include "lfi/errors.hpp"
#include "lfi/mdn_svi.hpp"

#include <cmath>
#include <sstream>

using namespace lfi;

namespace {

SviNet random_svi(const MdnDims& dims, Rng& rng, double log_var_centre = -3.0) {
  SviNet net = svi_init(dims, 0.01);
  net.phi_mean() = 0.5 * standard_normal(net.layout().size(), rng);
  net.phi_log_var() = Vector::Constant(net.layout().size(), log_var_centre) +
                      0.5 * standard_normal(net.layout().size(), rng);
  return net;
}

MdnDims random_dims(Rng& rng) {
  std::uniform_int_distribution<Index> small(1, 3);
  std::uniform_int_distribution<Index> hidden(1, 10);
  return MdnDims{small(rng), small(rng), small(rng), {hidden(rng)}};
}

bool close(double a, double b, double rel = 1e-4, double abs_floor = 1e-7) {
  const double err = std::abs(a - b);
  return err <= abs_floor || err <= rel * std::max(std::abs(a), std::abs(b));
}

// Net with no hidden layer whose first mean output is a single noisy linear unit.
SviNet single_unit_net() {
  SviNet net = svi_init(MdnDims{1, 1, 1, {}}, 1.0);
  net.phi_log_var().setConstant(-50.0);
  const auto& mean_block = net.layout().blocks()[static_cast<std::size_t>(net.layout().mean_index(0))];
  weights_of(net.phi_mean(), mean_block).setConstant(1.0);
  bias_of(net.phi_mean(), mean_block).setZero();
  weights_of(net.phi_log_var(), mean_block).setZero();
  bias_of(net.phi_log_var(), mean_block).setZero();
  return net;
}

}  // namespace

TEST_CASE("svi initialization") {
  const auto net = svi_init(MdnDims{3, 2, 2, {7}}, 0.01);
  CHECK(net.phi_mean().isZero());
  CHECK((net.phi_log_var().array() == std::log(100.0)).all());
  CHECK(net.phi_log_var()[0] == doctest::Approx(4.60517).epsilon(1e-6));
  CHECK(svi_init(MdnDims{1, 1, 1, {2}}, 1.0).phi_log_var().isZero());
  CHECK_THROWS(svi_init(MdnDims{1, 1, 1, {2}}, 0.0));
  CHECK_THROWS(svi_init(MdnDims{1, 1, 1, {2}}, -1.0));

  const auto q = forward_predict(net, Vector{{1.0, 2.0, 3.0}});
  CHECK((q.weights().array() == 0.5).all());
  for (const auto& c : q.components()) {
    CHECK(c.mean().isZero());
    CHECK(c.prec_chol().isIdentity());
  }
}

TEST_CASE("training start") {
  Rng a(12), b(12);
  const MdnDims dims{2, 2, 2, {6}};
  const auto net = svi_start(dims, a);
  CHECK(net.phi_mean() == MdnNet::initialized(dims, b).params());
  CHECK((net.phi_log_var().array() == kSviStartLogVar).all());
  CHECK(net.lambda() == kDefaultSviLambda);
  CHECK_THROWS(svi_start(dims, a, 0.0));
}

TEST_CASE("prediction mode is the conventional forward pass on the means") {
  Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto net = random_svi(random_dims(rng), rng);
    const Vector x = standard_normal(net.dims().x_dim, rng);
    const auto a = forward_predict(net, x);
    const auto b = forward(net.mean_net(), x);
    CHECK(a.weights() == b.weights());
    for (Index k = 0; k < a.size(); ++k) {
      CHECK(a.component(k).mean() == b.component(k).mean());
      CHECK(a.component(k).prec_chol() == b.component(k).prec_chol());
    }
  }
}

TEST_CASE("noisy forward pass") {
  Rng rng(2);
  auto net = random_svi(MdnDims{2, 2, 2, {5}}, rng);
  net.phi_log_var().setConstant(-50.0);
  const Vector x{{0.3, -0.4}};
  const auto quiet = forward_train(net, x, rng);
  const auto exact = forward_predict(net, x);
  for (Index k = 0; k < 2; ++k) CHECK((quiet.component(k).mean() - exact.component(k).mean()).norm() < 1e-9);

  net = random_svi(MdnDims{2, 2, 2, {5}}, rng);
  Rng r1(77), r2(77);
  const auto a = forward_train(net, x, r1);
  const auto b = forward_train(net, x, r2);
  CHECK(a.component(1).mean() == b.component(1).mean());
  CHECK(a.weights() == b.weights());
}

TEST_CASE("local reparameterization moments of a single unit") {
  const auto net = single_unit_net();
  Rng rng(3);
  const Vector x = Vector::Ones(1);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = forward_train(net, x, rng).component(0).mean()[0];
    sum += a;
    sum_sq += a * a;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean - 1.0) < 0.02);
  CHECK(std::abs(var - 2.0) < 0.05);
}

TEST_CASE("activation variance matches direct weight sampling") {
  Rng rng(4);
  const Index fan_in = 6;
  const Vector z = standard_normal(fan_in, rng);
  const Vector w_m = standard_normal(fan_in, rng);
  const Vector w_s = -1.0 + standard_normal(fan_in, rng).array();
  const double b_m = 0.3, b_s = -2.0;

  // Engine: a single mean unit fed directly by z.
  SviNet net = svi_init(MdnDims{fan_in, 1, 1, {}}, 1.0);
  net.phi_log_var().setConstant(-60.0);
  const auto& block = net.layout().blocks()[static_cast<std::size_t>(net.layout().mean_index(0))];
  weights_of(net.phi_mean(), block) = w_m.transpose();
  bias_of(net.phi_mean(), block).setConstant(b_m);
  weights_of(net.phi_log_var(), block) = w_s.transpose();
  bias_of(net.phi_log_var(), block).setConstant(b_s);

  const int n = 100000;
  double s1 = 0, s2 = 0, d1 = 0, d2 = 0;
  for (int i = 0; i < n; ++i) {
    const double a = forward_train(net, z, rng).component(0).mean()[0];
    s1 += a;
    s2 += a * a;
    const Vector w = w_m.array() + (0.5 * w_s.array()).exp() * standard_normal(fan_in, rng).array();
    const double b = b_m + std::exp(0.5 * b_s) * standard_normal(1, rng)[0];
    const double direct = w.dot(z) + b;
    d1 += direct;
    d2 += direct * direct;
  }
  const double engine_var = s2 / n - (s1 / n) * (s1 / n);
  const double direct_var = d2 / n - (d1 / n) * (d1 / n);
  const double formula = w_s.array().exp().matrix().dot(z.cwiseAbs2()) + std::exp(b_s);
  CHECK(std::abs(engine_var / direct_var - 1.0) < 0.02);
  CHECK(std::abs(formula / direct_var - 1.0) < 0.02);
}

TEST_CASE("kl term") {
  const MdnDims dims{2, 2, 2, {4}};
  for (const double lambda : {0.01, 0.5, 1.0}) {
    const auto net = svi_init(dims, lambda);
    const double p = static_cast<double>(net.layout().size());
    CHECK(svi_kl_term(net) == doctest::Approx(p / 2.0 + p / 2.0 * std::log(lambda)).epsilon(1e-12));
  }
  auto net = svi_init(dims, 1.0);
  CHECK(svi_kl_term(net) == doctest::Approx(net.layout().size() / 2.0));

  Rng rng(5);
  net = svi_init(dims, 0.3);
  net.phi_mean() = standard_normal(net.layout().size(), rng);
  const double before = svi_kl_term(net);
  const double norm_sq = net.phi_mean().squaredNorm();
  net.phi_mean() *= std::sqrt(2.0);
  CHECK(svi_kl_term(net) - before == doctest::Approx(0.15 * norm_sq).epsilon(1e-10));
}

TEST_CASE("kl term is minimized at the prior log variance") {
  const double lambda = 0.05;
  auto net = svi_init(MdnDims{1, 1, 1, {1}}, lambda);
  double best = 0.0, best_value = std::numeric_limits<double>::infinity();
  for (double s = -2.0; s <= 8.0; s += 1e-3) {
    net.phi_log_var().setConstant(s);
    const double v = svi_kl_term(net);
    if (v < best_value) {
      best_value = v;
      best = s;
    }
  }
  CHECK(std::abs(best - std::log(1.0 / lambda)) < 1e-3);
}

TEST_CASE("noise-free objective reduces to the conventional gradient") {
  Rng rng(6);
  auto net = random_svi(MdnDims{2, 2, 2, {5}}, rng);
  net.phi_log_var().setConstant(-50.0);
  const Matrix thetas = standard_normal(2, 8, rng);
  const Matrix xs = standard_normal(2, 8, rng);
  const Index n_total = 40;
  const auto o = svi_objective_grad(net, thetas, xs, n_total, rng);
  const auto conventional = mean_log_prob_gradient(net.mean_net(), thetas, xs);
  CHECK(std::abs(o.mean_log_prob - conventional.value) < 1e-6);
  const Vector loglik_grad = o.grad_mean + (net.lambda() / n_total) * net.phi_mean();
  CHECK((loglik_grad - conventional.gradient).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("kl part of the mean gradient") {
  Rng rng(7);
  const auto net = random_svi(MdnDims{1, 2, 1, {3}}, rng);
  const Matrix thetas = standard_normal(2, 5, rng);
  const Matrix xs = standard_normal(1, 5, rng);
  const auto noise = draw_svi_noise(net.layout(), 5, rng);
  const auto a = svi_objective_grad(net, thetas, xs, 10, noise);
  const auto b = svi_objective_grad(net, thetas, xs, 20, noise);
  // g(N) = g_loglik - (lambda / N) phi_m
  const Vector expected = net.lambda() * net.phi_mean() * (1.0 / 20.0 - 1.0 / 10.0);
  CHECK((a.grad_mean - b.grad_mean - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS(svi_objective_grad(net, thetas, xs, 3, noise));
}

TEST_CASE("fixed-noise objective gradient matches central finite differences") {
  Rng rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const auto dims = random_dims(rng);
    const auto net = random_svi(dims, rng, -2.0);
    const Index batch = 3;
    const Index n_total = 50;
    const Matrix thetas = standard_normal(dims.theta_dim, batch, rng);
    const Matrix xs = standard_normal(dims.x_dim, batch, rng);
    const auto noise = draw_svi_noise(net.layout(), batch, rng);
    const auto analytic = svi_objective_grad(net, thetas, xs, n_total, noise);

    SviNet probe = net;
    const double h = 1e-5;
    bool ok = true;
    for (Index i = 0; i < net.layout().size(); ++i) {
      for (int which = 0; which < 2; ++which) {
        Vector& target = which == 0 ? probe.phi_mean() : probe.phi_log_var();
        const double saved = target[i];
        target[i] = saved + h;
        const double up = svi_objective_grad(probe, thetas, xs, n_total, noise).value;
        target[i] = saved - h;
        const double down = svi_objective_grad(probe, thetas, xs, n_total, noise).value;
        target[i] = saved;
        const double numeric = (up - down) / (2 * h);
        const double exact = which == 0 ? analytic.grad_mean[i] : analytic.grad_log_var[i];
        if (!close(exact, numeric)) {
          ok = false;
          MESSAGE("param " << i << (which ? " log_var" : " mean") << ": " << exact << " vs " << numeric);
        }
      }
    }
    CHECK(ok);
  }
}

TEST_CASE("svi training") {
  const lfi::test::LinearGaussian problem;
  Rng rng(9);
  const MdnDims dims{1, 1, 1, {20}};
  {
    const auto small = problem.dataset(200, rng);
    TrainConfig cfg;
    cfg.n_epochs = 300;
    cfg.rng_seed = 4;
    TrainLog log;
    const auto trained = train_mdn_svi(svi_init(dims), small, cfg, &log);
    CHECK(log.epoch_objective.back() > log.epoch_objective.front());
    const auto again = train_mdn_svi(svi_init(dims), small, cfg);
    CHECK(again.phi_mean() == trained.phi_mean());
    CHECK(again.phi_log_var() == trained.phi_log_var());
  }
  const auto data = problem.dataset(500, rng);
  TrainConfig cfg;
  cfg.n_epochs = 1500;
  cfg.rng_seed = 5;
  Rng init_rng(3);
  const auto trained = train_mdn_svi(svi_start(dims, init_rng), data, cfg);
  const auto q = forward_predict(trained, Vector::Constant(1, 0.5));
  const double kl = kl_divergence(problem.posterior(0.5), q.component(0));
  MESSAGE("svi: mean " << q.component(0).mean()[0] << " KL " << kl);
  CHECK(std::abs(q.component(0).mean()[0] - 0.495) < 0.05);
  CHECK(kl < 0.1);
}

TEST_CASE("svi replication copies log variances") {
  Rng rng(10);
  const auto net = random_svi(MdnDims{2, 2, 1, {4}}, rng);
  const auto rep = replicate_components(net, 3, rng, 1e-3);
  CHECK(rep.dims().n_components == 3);
  const auto& from = net.layout();
  const auto& to = rep.layout();
  for (Index k = 0; k < 3; ++k) {
    const auto& src = from.blocks()[static_cast<std::size_t>(from.diag_index(0))];
    const auto& dst = to.blocks()[static_cast<std::size_t>(to.diag_index(k))];
    CHECK(Matrix(weights_of(rep.phi_log_var(), dst)) == Matrix(weights_of(net.phi_log_var(), src)));
    CHECK((Matrix(weights_of(rep.phi_mean(), dst)) - Matrix(weights_of(net.phi_mean(), src))).cwiseAbs().maxCoeff() < 0.01);
  }
  const auto& alpha = to.blocks()[static_cast<std::size_t>(to.alpha_index())];
  CHECK(Vector(bias_of(rep.phi_log_var(), alpha)).isConstant(
      net.phi_log_var()[from.blocks()[static_cast<std::size_t>(from.alpha_index())].bias_offset]));
}

TEST_CASE("svi parameter file round trip") {
  Rng rng(11);
  const auto net = random_svi(MdnDims{3, 2, 2, {4}}, rng);
  std::stringstream buf;
  save(net, buf);
  const auto back = load_svi(buf);
  CHECK(back.dims() == net.dims());
  CHECK(back.lambda() == net.lambda());
  CHECK(back.phi_mean() == net.phi_mean());
  CHECK(back.phi_log_var() == net.phi_log_var());
}
