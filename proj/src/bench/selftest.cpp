#include "lfi/bench/selftest.hpp"

#include "lfi/abc.hpp"
#include "lfi/mdn.hpp"
#include "lfi/mdn_svi.hpp"
#include "lfi/mixture.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace lfi {

namespace {

// |a - b| / max(|a|, |b|) over the whole gradient vector.
Scalar relative_error(const Vector& a, const Vector& b) {
  const Scalar scale = std::max(a.norm(), b.norm());
  return scale > 0.0 ? (a - b).norm() / scale : 0.0;
}

// Worst single entry, for the report only: entries near zero are dominated
// by rounding in the differenced objective.
Scalar worst_entry(const Vector& a, const Vector& b) {
  Scalar worst = 0.0;
  for (Index i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max({std::abs(a[i]), std::abs(b[i]), 1e-300}));
  return worst;
}

MdnDims random_dims(Rng& rng) {
  std::uniform_int_distribution<Index> small(1, 3);
  std::uniform_int_distribution<Index> width(1, 8);
  std::uniform_int_distribution<Index> depth(0, 2);
  MdnDims d{small(rng), small(rng), small(rng), {}};
  for (Index l = depth(rng); l > 0; --l) d.hidden.push_back(width(rng));
  return d;
}

// Central difference of f along every coordinate of p.
template <class F>
Vector central_difference(Vector& p, F&& f) {
  Vector g(p.size());
  for (Index i = 0; i < p.size(); ++i) {
    const Scalar saved = p[i];
    p[i] = saved + kGradientStep;
    const Scalar up = f();
    p[i] = saved - kGradientStep;
    const Scalar down = f();
    p[i] = saved;
    g[i] = (up - down) / (2.0 * kGradientStep);
  }
  return g;
}

// Density from (mean, covariance) through its own Cholesky, not the library path.
Scalar direct_density(const Vector& mean, const Matrix& cov, const Vector& t) {
  const Eigen::LLT<Matrix> llt(cov);
  const Vector z = llt.matrixL().solve(t - mean);
  const Scalar log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return std::exp(-0.5 * z.squaredNorm() - 0.5 * log_det - 0.5 * static_cast<Scalar>(t.size()) * kLog2Pi);
}

Scalar direct_density(const GaussianMixture& m, const Vector& t) {
  Scalar s = 0.0;
  for (Index k = 0; k < m.size(); ++k)
    s += m.weights()[k] * direct_density(m.component(k).mean(), m.component(k).covariance(), t);
  return s;
}

Matrix random_spd(Index d, Rng& rng, Scalar min_eig, Scalar scale) {
  const Matrix a = standard_normal(d, d, rng);
  return scale * (a * a.transpose() / static_cast<Scalar>(d)) + min_eig * Matrix::Identity(d, d);
}

struct DivisionCase {
  GaussianMixture q;
  Gaussian p0;
  Scalar extent = 0.0;
};

// Component precisions are P0 + A_k with A_k positive definite, so the division is valid.
DivisionCase division_case(Index d, Rng& rng) {
  const Gaussian p0 = Gaussian::from_covariance(standard_normal(d, rng), random_spd(d, rng, 0.5, 2.0));
  std::uniform_int_distribution<Index> count(1, 3);
  const Index k_count = count(rng);
  std::vector<Gaussian> comps;
  Vector weights(k_count);
  Scalar extent = 0.0;
  for (Index k = 0; k < k_count; ++k) {
    const Matrix extra = random_spd(d, rng, 0.3, 1.0);
    const Matrix precision = p0.precision() + extra;
    comps.push_back(Gaussian::from_precision(0.7 * standard_normal(d, rng), precision));
    weights[k] = 0.2 + uniform01(rng);
    const Vector ratio_mean = extra.ldlt().solve(precision * comps.back().mean() - p0.precision() * p0.mean());
    const Scalar min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(extra).eigenvalues().minCoeff();
    extent = std::max(extent, ratio_mean.cwiseAbs().maxCoeff() + 12.0 / std::sqrt(min_eig));
  }
  return {GaussianMixture(weights, std::move(comps)), p0, extent};
}

Scalar division_error_1d(const DivisionCase& c) {
  const GaussianMixture result = divide_mixture_by_gaussian(c.q, c.p0);
  const Index n = 20001;
  const Scalar h = 2.0 * c.extent / static_cast<Scalar>(n - 1);
  std::vector<Scalar> ratio(static_cast<std::size_t>(n));
  const Matrix p0_cov = c.p0.covariance();
  Scalar z = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Vector t = Vector::Constant(1, -c.extent + h * static_cast<Scalar>(i));
    const Scalar r = direct_density(c.q, t) / direct_density(c.p0.mean(), p0_cov, t);
    ratio[static_cast<std::size_t>(i)] = r;
    z += (i == 0 || i == n - 1) ? 0.5 * r : r;
  }
  z *= h;
  Scalar worst = 0.0;
  for (Index i = 0; i < n; i += 7) {
    const Vector t = Vector::Constant(1, -c.extent + h * static_cast<Scalar>(i));
    worst = std::max(worst, std::abs(ratio[static_cast<std::size_t>(i)] / z - std::exp(log_pdf(result, t))));
  }
  return worst;
}

Scalar division_error_2d(const DivisionCase& c) {
  const GaussianMixture result = divide_mixture_by_gaussian(c.q, c.p0);
  const Matrix p0_cov = c.p0.covariance();
  auto ratio = [&](Scalar a, Scalar b) {
    const Vector t{{a, b}};
    return direct_density(c.q, t) / direct_density(c.p0.mean(), p0_cov, t);
  };
  const Index n = 801;
  const Scalar h = 2.0 * c.extent / static_cast<Scalar>(n - 1);
  Scalar z = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Scalar wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    for (Index j = 0; j < n; ++j) {
      const Scalar wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      z += wi * wj * ratio(-c.extent + h * static_cast<Scalar>(i), -c.extent + h * static_cast<Scalar>(j));
    }
  }
  z *= h * h;
  Scalar worst = 0.0;
  const Index m = 41;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      const Scalar a = c.extent / 3.0 * (-1.0 + 2.0 * static_cast<Scalar>(i) / static_cast<Scalar>(m - 1));
      const Scalar b = c.extent / 3.0 * (-1.0 + 2.0 * static_cast<Scalar>(j) / static_cast<Scalar>(m - 1));
      worst = std::max(worst, std::abs(ratio(a, b) / z - std::exp(log_pdf(result, Vector{{a, b}}))));
    }
  return worst;
}

}  // namespace

CheckResult check_gradients(std::uint64_t seed, int n_architectures) {
  Rng rng(seed);
  Scalar worst_mdn = 0.0;
  Scalar worst_svi = 0.0;
  Scalar worst_single = 0.0;
  auto record = [&](Scalar& worst, const Vector& exact, const Vector& numeric) {
    worst = std::max(worst, relative_error(exact, numeric));
    worst_single = std::max(worst_single, worst_entry(exact, numeric));
  };
  for (int rep = 0; rep < n_architectures; ++rep) {
    const MdnDims dims = random_dims(rng);
    const Index batch = 4;
    const Matrix thetas = standard_normal(dims.theta_dim, batch, rng);
    const Matrix xs = standard_normal(dims.x_dim, batch, rng);

    MdnNet net(dims);
    net.params() = 0.5 * standard_normal(net.layout().size(), rng);
    const Vector analytic = mean_log_prob_gradient(net, thetas, xs).gradient;
    const Vector numeric = central_difference(net.params(), [&] { return mean_log_prob(net, thetas, xs); });
    record(worst_mdn, analytic, numeric);

    SviNet svi = svi_init(dims, kDefaultSviLambda);
    svi.phi_mean() = 0.5 * standard_normal(svi.layout().size(), rng);
    svi.phi_log_var() = Vector::Constant(svi.layout().size(), -2.0) + 0.5 * standard_normal(svi.layout().size(), rng);
    const Index n_total = 50;
    const auto noise = draw_svi_noise(svi.layout(), batch, rng);
    const auto exact = svi_objective_grad(svi, thetas, xs, n_total, noise);
    auto bound = [&] { return svi_objective_grad(svi, thetas, xs, n_total, noise).value; };
    record(worst_svi, exact.grad_mean, central_difference(svi.phi_mean(), bound));
    record(worst_svi, exact.grad_log_var, central_difference(svi.phi_log_var(), bound));
  }
  CheckResult r;
  r.name = "gradients";
  r.worst = std::max(worst_mdn, worst_svi);
  r.tolerance = kGradientTolerance;
  r.passed = r.worst <= r.tolerance;
  std::ostringstream d;
  d << n_architectures << " architectures; worst relative error mdn " << worst_mdn << ", svi " << worst_svi
    << "; worst single entry " << worst_single;
  r.detail = d.str();
  return r;
}

CheckResult check_division(std::uint64_t seed, int n_cases) {
  Rng rng(seed);
  Scalar worst1 = 0.0;
  Scalar worst2 = 0.0;
  for (int i = 0; i < n_cases; ++i) {
    if (i % 2 == 0)
      worst1 = std::max(worst1, division_error_1d(division_case(1, rng)));
    else
      worst2 = std::max(worst2, division_error_2d(division_case(2, rng)));
  }
  CheckResult r;
  r.name = "division";
  r.worst = std::max(worst1, worst2);
  r.tolerance = kDivisionTolerance;
  r.passed = r.worst <= r.tolerance;
  std::ostringstream d;
  d << n_cases << " cases; max density error 1-D " << worst1 << ", 2-D " << worst2;
  r.detail = d.str();
  return r;
}

CheckResult check_ess(std::uint64_t seed) {
  Rng rng(seed);
  // a power of two keeps 1/N and its squares exact
  const Index n = 64;
  const Scalar uniform = ess_weighted(Vector::Constant(n, 1.0 / static_cast<Scalar>(n)));
  Vector one_hot = Vector::Zero(n);
  one_hot[n / 2] = 1.0;
  const Scalar single = ess_weighted(one_hot);
  const Scalar chain = ess_mcmc(standard_normal(1, 10000, rng));
  CheckResult r;
  r.name = "ess";
  r.worst = std::abs(chain / 10000.0 - 1.0);
  r.tolerance = 0.15;
  r.passed = uniform == static_cast<Scalar>(n) && single == 1.0 &&
             r.worst <= r.tolerance;
  std::ostringstream d;
  d << "uniform weights " << uniform << " (N=" << n << "), one-hot " << single << ", iid chain " << chain
    << " of 10000";
  r.detail = d.str();
  return r;
}

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
  return {check_gradients(seed), check_division(seed), check_ess(seed)};
}

}  // namespace lfi
