#include "doctest.h"

#include "lfi/abc.hpp"
#include "lfi/errors.hpp"

#include <cmath>

using namespace lfi;

namespace {

Prior box1(double lo, double hi) { return UniformBoxPrior(Vector::Constant(1, lo), Vector::Constant(1, hi)); }

const Simulator kIdentity{"identity", 1, 1, [](const Vector& theta, Rng&) { return theta; }};

Simulator noisy_identity() {
  return Simulator{"noisy", 1, 1, [](const Vector& theta, Rng& rng) { return Vector(theta + standard_normal(1, rng)); }};
}

}  // namespace

TEST_CASE("effective sample size of weights") {
  CHECK(ess_weighted(Vector::Constant(100, 0.01)) == doctest::Approx(100.0).epsilon(1e-12));
  Vector one_hot = Vector::Zero(7);
  one_hot[3] = 1.0;
  CHECK(ess_weighted(one_hot) == 1.0);
  CHECK(ess_weighted(Vector{{0.5, 0.25, 0.25}}) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("effective sample size of chains") {
  Rng rng(1);
  const Matrix iid = standard_normal(1, 10000, rng);
  CHECK(std::abs(ess_mcmc(iid) / 10000.0 - 1.0) < 0.15);

  Matrix doubled(1, 10000);
  for (Index i = 0; i < 5000; ++i) doubled(0, 2 * i) = doubled(0, 2 * i + 1) = iid(0, i);
  CHECK(std::abs(ess_mcmc(doubled) / 5000.0 - 1.0) < 0.2);

  // minimum over dimensions
  Matrix two(2, 10000);
  two.row(0) = iid.row(0);
  two.row(1) = doubled.row(0);
  CHECK(ess_mcmc(two) == ess_mcmc(doubled));

  CHECK_THROWS_AS(ess_mcmc(Matrix::Constant(1, 100, 3.0)), DegenerateChain);
  CHECK_THROWS(ess_mcmc(Matrix::Zero(1, 5)));
}

TEST_CASE("rejection abc") {
  Rng rng(2);
  SUBCASE("huge tolerance returns the prior") {
    const auto r = rejection_abc(noisy_identity(), box1(-2.0, 4.0), Vector::Zero(1), 1e9, 20000, rng);
    CHECK(r.n_simulations == 20000);
    const double mean = r.samples.mean();
    const double var = (r.samples.array() - mean).square().mean();
    CHECK(std::abs(mean - 1.0) < 0.05);
    CHECK(std::abs(var - 3.0) < 0.1);
    CHECK(r.ess == 20000.0);
    CHECK(r.weights.sum() == doctest::Approx(1.0));
  }
  SUBCASE("noiseless acceptance region") {
    const auto r = rejection_abc(kIdentity, box1(-1.0, 1.0), Vector::Zero(1), 0.1, 5000, rng);
    const double rate = 5000.0 / static_cast<double>(r.n_simulations);
    CHECK(std::abs(rate - 0.1) < 0.01);
    CHECK(r.samples.cwiseAbs().maxCoeff() < 0.1);
    const double var = r.samples.array().square().mean();
    CHECK(std::abs(var / (0.01 / 3.0) - 1.0) < 0.05);
  }
  SUBCASE("budget") {
    try {
      rejection_abc(kIdentity, box1(-1.0, 1.0), Vector::Zero(1), 1e-6, 10, rng, 1000);
      FAIL("expected BudgetExhausted");
    } catch (const BudgetExhausted& e) {
      CHECK(e.n_simulations() == 1000);
      CHECK(e.n_accepted() == 0);
    }
  }
  SUBCASE("exploded draws are rejections") {
    const Simulator boom{"boom", 1, 1, [](const Vector& t, Rng&) -> Vector {
                           if (t[0] > 0.0) throw SimulationExploded("boom");
                           return t;
                         }};
    const auto r = rejection_abc(boom, box1(-1.0, 1.0), Vector::Zero(1), 10.0, 1000, rng);
    CHECK(r.samples.maxCoeff() <= 0.0);
    CHECK(r.n_simulations > 1500);
  }
}

TEST_CASE("rejection abc at a fixed budget") {
  Rng rng(5);
  const auto r = rejection_abc_budget(kIdentity, box1(-1.0, 1.0), Vector::Zero(1), 0.1, 20000, rng);
  CHECK(r.n_simulations == 20000);
  CHECK(std::abs(static_cast<double>(r.samples.cols()) / 20000.0 - 0.1) < 0.01);
  CHECK(r.samples.cwiseAbs().maxCoeff() < 0.1);
  CHECK(r.ess == static_cast<double>(r.samples.cols()));

  const auto none = rejection_abc_budget(kIdentity, box1(5.0, 6.0), Vector::Zero(1), 0.1, 100, rng);
  CHECK(none.samples.cols() == 0);
  CHECK(none.degenerate);
}

TEST_CASE("mcmc abc") {
  Rng rng(3);
  SUBCASE("accept-all random walk has no drift") {
    McmcConfig cfg{0.01, 100000, Vector::Constant(1, 0.5)};
    const auto r = mcmc_abc(noisy_identity(), box1(-1e6, 1e6), Vector::Zero(1), 1e12, cfg, rng);
    CHECK(r.samples.cols() == 100000);
    CHECK(r.n_simulations == 100000);
    const double walk_sd = 0.01 * std::sqrt(100000.0 / 3.0);
    CHECK(std::abs(r.samples.mean() - 0.5) < 4 * walk_sd);
    CHECK_FALSE(r.degenerate);
  }
  SUBCASE("frozen chain") {
    McmcConfig cfg{1e-300, 1000, Vector::Constant(1, 0.5)};
    const auto r = mcmc_abc(noisy_identity(), box1(-1.0, 1.0), Vector::Zero(1), 1e12, cfg, rng);
    CHECK((r.samples.array() == 0.5).all());
    CHECK(r.degenerate);
  }
  SUBCASE("stationary distribution on the acceptance region") {
    McmcConfig cfg{0.05, 200000, Vector::Constant(1, 0.0)};
    const auto r = mcmc_abc(kIdentity, box1(-1.0, 1.0), Vector::Zero(1), 0.1, cfg, rng);
    CHECK(r.samples.cwiseAbs().maxCoeff() < 0.1);
    std::array<double, 4> hist{};
    for (Index i = 0; i < r.samples.cols(); ++i)
      hist[static_cast<std::size_t>(std::floor((r.samples(0, i) + 0.1) / 0.05))] += 1.0;
    for (double h : hist) CHECK(std::abs(h / 200000.0 - 0.25) < 0.03);

    // detailed balance between the two halves
    long left_to_right = 0, right_to_left = 0;
    for (Index i = 1; i < r.samples.cols(); ++i) {
      const bool was_left = r.samples(0, i - 1) < 0.0, is_left = r.samples(0, i) < 0.0;
      if (was_left && !is_left) ++left_to_right;
      if (!was_left && is_left) ++right_to_left;
    }
    CHECK(std::abs(left_to_right - right_to_left) <= 1);
    CHECK(r.ess > 0.0);
    CHECK(r.ess <= 200000.0);
  }
  SUBCASE("prior ratio and support") {
    McmcConfig cfg{0.5, 50000, Vector::Constant(1, 0.0)};
    const Prior g = Gaussian::isotropic(Vector::Zero(1), 1.0);
    const auto r = mcmc_abc(noisy_identity(), g, Vector::Zero(1), 1e12, cfg, rng);
    const double var = (r.samples.array() - r.samples.mean()).square().mean();
    CHECK(std::abs(r.samples.mean()) < 0.1);
    CHECK(std::abs(var - 1.0) < 0.1);

    McmcConfig out_cfg{0.1, 10, Vector::Constant(1, 5.0)};
    CHECK_THROWS(mcmc_abc(kIdentity, box1(-1.0, 1.0), Vector::Zero(1), 1.0, out_cfg, rng));
  }
}

TEST_CASE("smc abc") {
  SUBCASE("a single round is rejection abc") {
    SmcConfig cfg{200, 0.5, 0.5, 1};
    Rng a(4), b(4);
    const auto smc = smc_abc(noisy_identity(), box1(-3.0, 3.0), Vector::Zero(1), cfg, a);
    const auto rej = rejection_abc(noisy_identity(), box1(-3.0, 3.0), Vector::Zero(1), 0.5, 200, b);
    CHECK(smc.samples == rej.samples);
    CHECK(smc.n_simulations == rej.n_simulations);
    CHECK(smc.ess == doctest::Approx(200.0));
  }
  SUBCASE("population concentrates on the final acceptance region") {
    SmcConfig cfg{500, 0.5, 0.5, 5};
    Rng rng(5);
    const auto r = smc_abc(kIdentity, box1(-1.0, 1.0), Vector::Zero(1), cfg, rng);
    CHECK_FALSE(r.degenerate);
    CHECK(r.round_epsilons.size() == 5);
    CHECK(r.epsilon == doctest::Approx(0.5 * std::pow(0.5, 4)));
    CHECK(r.samples.cwiseAbs().maxCoeff() < r.epsilon);
    CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((r.weights.array() >= 0.0).all());
    CHECK(r.ess <= 500.0);
    long total = 0;
    for (long s : r.round_simulations) total += s;
    CHECK(total == r.n_simulations);
  }
  SUBCASE("budget stops at the last completed round") {
    SmcConfig cfg{100, 0.5, 0.1, 6};
    cfg.max_simulations = 3000;
    Rng rng(6);
    const auto r = smc_abc(kIdentity, box1(-1.0, 1.0), Vector::Zero(1), cfg, rng);
    CHECK(r.degenerate);
    CHECK(r.round_epsilons.size() < 6);
    CHECK(r.n_simulations <= 3000);
    CHECK(r.samples.cwiseAbs().maxCoeff() < r.epsilon);
  }
}
