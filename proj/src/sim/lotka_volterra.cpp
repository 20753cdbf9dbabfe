#include "lfi/sim/lotka_volterra.hpp"

#include "lfi/errors.hpp"

#include <cmath>

namespace lfi {

namespace {

constexpr Scalar kVarianceFloor = 1e-12;

Counts step(long dx, long dy) { return Counts{{dx, dy}}; }

}  // namespace

SsaTrajectory gillespie_lv(const LvProblem& p, const Vector& theta, Rng& rng) {
  if (theta.size() != 4) throw DimensionMismatch("gillespie_lv", 4, theta.size());
  if ((theta.array() < 0.0).any()) throw std::invalid_argument("gillespie_lv: rates must be nonnegative");
  const Scalar t1 = theta[0], t2 = theta[1], t3 = theta[2], t4 = theta[3];
  const auto xy = [](const Counts& s) { return static_cast<Scalar>(s[0]) * static_cast<Scalar>(s[1]); };
  const std::vector<Reaction> reactions{
      {[=](const Counts& s) { return t1 * xy(s); }, step(1, 0)},
      {[=](const Counts& s) { return t2 * static_cast<Scalar>(s[0]); }, step(-1, 0)},
      {[=](const Counts& s) { return t3 * static_cast<Scalar>(s[1]); }, step(0, 1)},
      {[=](const Counts& s) { return t4 * xy(s); }, step(0, -1)},
  };
  return gillespie(reactions, Counts{{p.predators, p.prey}}, p.duration, p.interval, rng, p.max_events);
}

Vector lv_summary(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  if (x.size() != y.size()) throw DimensionMismatch("lv_summary", x.size(), y.size());
  const Index n = x.size();
  if (n < 3) throw std::invalid_argument("lv_summary: series too short");
  const auto nn = static_cast<Scalar>(n);
  const Eigen::ArrayXd cx = x.array() - x.mean();
  const Eigen::ArrayXd cy = y.array() - y.mean();
  const Scalar vx = cx.square().sum() / nn;
  const Scalar vy = cy.square().sum() / nn;

  auto acf = [&](const Eigen::ArrayXd& c, Scalar v, Index lag) {
    if (!(v > 0.0)) return 0.0;
    return (c.head(n - lag) * c.tail(n - lag)).sum() / (nn * v);
  };
  Vector s(kLvStats);
  s << x.mean(), y.mean(), std::log(std::max(vx, kVarianceFloor)), std::log(std::max(vy, kVarianceFloor)),
      acf(cx, vx, 1), acf(cx, vx, 2), acf(cy, vy, 1), acf(cy, vy, 2),
      (vx > 0.0 && vy > 0.0) ? (cx * cy).sum() / (nn * std::sqrt(vx * vy)) : 0.0;
  return s;
}

Vector pilot_normalize(const Vector& stats, const PilotNormalizer& pilot) {
  if (stats.size() != pilot.mean.size() || stats.size() != pilot.std.size())
    throw DimensionMismatch("pilot_normalize", pilot.mean.size(), stats.size());
  if ((pilot.std.array() <= 0.0).any()) throw PilotDegenerate("pilot_normalize: zero pilot standard deviation");
  return (stats - pilot.mean).cwiseQuotient(pilot.std);
}

Vector lv_raw_stats(const LvProblem& p, const Vector& theta, Rng& rng) {
  const auto traj = gillespie_lv(p, theta, rng);
  const Matrix series = traj.records.cast<Scalar>().transpose();
  return lv_summary(series.col(0), series.col(1));
}

PilotNormalizer lv_pilot(const LvProblem& p, Index n, Rng& rng) {
  if (n < 2) throw std::invalid_argument("lv_pilot: need at least two simulations");
  const Prior prior = lv_prior(p);
  Matrix stats(kLvStats, n);
  for (Index i = 0; i < n;) {
    try {
      stats.col(i) = lv_raw_stats(p, sample(prior, rng).array().exp().matrix(), rng);
      ++i;
    } catch (const SimulationExploded&) {
    }
  }
  PilotNormalizer out;
  out.mean = stats.rowwise().mean();
  out.std = ((stats.colwise() - out.mean).array().square().rowwise().sum() / static_cast<Scalar>(n - 1)).sqrt();
  if ((out.std.array() <= 0.0).any()) throw PilotDegenerate("lv_pilot: a statistic is constant across the pilot run");
  return out;
}

Simulator lv_simulator(const LvProblem& p, const PilotNormalizer& pilot) {
  return Simulator{"lv", 4, kLvStats, [p, pilot](const Vector& log_theta, Rng& rng) {
                     return pilot_normalize(lv_raw_stats(p, log_theta.array().exp().matrix(), rng), pilot);
                   }};
}

Prior lv_prior(const LvProblem& p) {
  return UniformBoxPrior(Vector::Constant(4, p.log_theta_lower), Vector::Constant(4, p.log_theta_upper));
}

}  // namespace lfi
