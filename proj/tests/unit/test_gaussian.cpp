#include "doctest.h"
#include "oracles.hpp"

#include "lfi/errors.hpp"
#include "lfi/gaussian.hpp"

#include <Eigen/LU>

#include <cmath>

using namespace lfi;
using lfi::test::normal_pdf;

TEST_CASE("gaussian log density at known points") {
  CHECK(log_pdf(Gaussian::standard(1), Vector::Zero(1)) == doctest::Approx(-0.918938533).epsilon(1e-9));
  CHECK(log_pdf(Gaussian::standard(2), Vector::Zero(2)) == doctest::Approx(-1.837877066).epsilon(1e-9));
  const auto g = Gaussian::isotropic(Vector::Ones(1), 4.0);
  CHECK(log_pdf(g, Vector::Ones(1)) == doctest::Approx(std::log(normal_pdf(1.0, 1.0, 4.0))).epsilon(1e-12));
  CHECK(log_pdf(g, Vector::Ones(1)) == doctest::Approx(-1.612085713).epsilon(1e-9));
}

TEST_CASE("gaussian rejects bad factors and mismatched inputs") {
  Matrix lower(2, 2);
  lower << 1, 0, 0.5, 1;
  CHECK_THROWS_AS(Gaussian(Vector::Zero(2), lower), std::invalid_argument);
  Matrix neg = Matrix::Identity(2, 2);
  neg(1, 1) = -1;
  CHECK_THROWS_AS(Gaussian(Vector::Zero(2), neg), std::invalid_argument);
  CHECK_THROWS_AS(log_pdf(Gaussian::standard(2), Vector::Zero(3)), DimensionMismatch);
}

TEST_CASE("log determinant from the factor matches the direct determinant") {
  Rng rng(7);
  for (Index d = 1; d <= 10; ++d) {
    const Matrix cov = lfi::test::random_spd(d, rng);
    const auto g = Gaussian::from_covariance(Vector::Zero(d), cov);
    const double direct = std::log(cov.determinant());
    CHECK(lfi::test::relative_error(g.log_det_covariance(), direct, 1.0) < 1e-10);
  }
}

TEST_CASE("covariance round trip through the precision factor") {
  Rng rng(11);
  for (Index d = 1; d <= 6; ++d) {
    const Matrix cov = lfi::test::random_spd(d, rng);
    const auto g = Gaussian::from_covariance(Vector::Random(d), cov);
    CHECK((g.covariance() - cov).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("gaussian densities integrate to one on a grid") {
  Rng rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const double var = 0.1 + 2.0 * uniform01(rng);
    const auto g = Gaussian::isotropic(Vector::Constant(1, uniform01(rng)), var);
    const auto xs = lfi::test::linspace(-20, 20, 8001);
    std::vector<double> ys;
    for (double x : xs) ys.push_back(std::exp(log_pdf(g, Vector::Constant(1, x))));
    CHECK(lfi::test::trapezoid(ys, xs[1] - xs[0]) == doctest::Approx(1.0).epsilon(1e-4));

    const auto g2 = Gaussian::from_covariance(Vector::Zero(2), lfi::test::random_spd(2, rng));
    const double mass = lfi::test::trapezoid_2d(
        [&](double a, double b) { return std::exp(log_pdf(g2, Vector{{a, b}})); }, -15, 15, -15,
        15, 601);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("kl divergence closed forms") {
  const auto n01 = Gaussian::standard(1);
  CHECK(kl_divergence(n01, n01) == doctest::Approx(0.0));
  CHECK(kl_divergence(n01, Gaussian::isotropic(Vector::Ones(1), 1.0)) == doctest::Approx(0.5));
  CHECK(kl_divergence(n01, Gaussian::isotropic(Vector::Zero(1), 2.0)) ==
        doctest::Approx(0.5 * (0.5 - 1.0 + std::log(2.0))).epsilon(1e-12));
  CHECK(kl_divergence(n01, Gaussian::isotropic(Vector::Zero(1), 2.0)) ==
        doctest::Approx(0.09657).epsilon(1e-4));
}

TEST_CASE("kl divergence is nonnegative and zero only for equal parameters") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const Index d = 1 + rep % 4;
    const auto p = Gaussian::from_covariance(standard_normal(d, rng), lfi::test::random_spd(d, rng));
    const auto q = Gaussian::from_covariance(standard_normal(d, rng), lfi::test::random_spd(d, rng));
    CHECK(kl_divergence(p, q) > 0.0);
    CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("sampling moments") {
  Rng rng(17);
  const auto g = Gaussian::isotropic(Vector::Constant(1, 3.0), 2.0);
  std::vector<Vector> xs;
  for (int i = 0; i < 100000; ++i) xs.push_back(sample(g, rng));
  const auto fit = fit_gaussian(xs);
  CHECK(std::abs(fit.mean()[0] - 3.0) < 0.02);
  CHECK(std::abs(fit.covariance()(0, 0) - 2.0) < 0.05);
}

TEST_CASE("weighted gaussian fit") {
  const std::vector<Vector> two{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
  const auto g = fit_gaussian_weighted(two, std::vector<double>{0.5, 0.5});
  CHECK(g.mean()[0] == doctest::Approx(0.0));
  CHECK(g.covariance()(0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_gaussian_weighted(two, std::vector<double>{1.0, 0.0}), DegenerateSample);
  const std::vector<Vector> same{Vector::Zero(2), Vector::Zero(2), Vector::Zero(2)};
  // Diagonal floor keeps a point cloud with zero spread factorizable.
  CHECK_NOTHROW(fit_gaussian(same));
}

TEST_CASE("uniform weights reproduce the unweighted moment estimate bit for bit") {
  Rng rng(23);
  std::vector<Vector> xs;
  for (int i = 0; i < 257; ++i) xs.push_back(standard_normal(3, rng));
  const double w = 1.0 / 257.0;
  const auto g = fit_gaussian_weighted(xs, std::vector<double>(xs.size(), w));

  Vector mean = Vector::Zero(3);
  for (const auto& x : xs) mean += x;
  mean /= 257.0;
  Matrix cov = Matrix::Zero(3, 3);
  for (const auto& x : xs) cov.noalias() += (x - mean) * (x - mean).transpose();
  cov /= 257.0;
  const auto reference = Gaussian::from_covariance(mean, cov);
  CHECK(g.mean() == reference.mean());
  CHECK(g.prec_chol() == reference.prec_chol());
}

TEST_CASE("uniform box prior") {
  const UniformBoxPrior box(Vector{{-1.0, 0.0}}, Vector{{1.0, 4.0}});
  CHECK(log_pdf(box, Vector{{0.0, 1.0}}) == doctest::Approx(-std::log(8.0)));
  CHECK(std::isinf(log_pdf(box, Vector{{2.0, 1.0}})));
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) CHECK(box.contains(sample(box, rng)));
  CHECK_THROWS(UniformBoxPrior(Vector::Ones(1), Vector::Zero(1)));
}
